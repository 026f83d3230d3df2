#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsekit/analyzer.hpp"
#include "sparsekit/corpus.hpp"
#include "sparsekit/dictionary.hpp"
#include "sparsekit/lexical.hpp"

namespace sparsekit {

/// Vocabulary-sized sparse vector: strictly increasing term ids, all weights
/// positive (zero entries are pruned on construction).
class SparseVector {
  public:
    struct Entry {
        std::uint32_t term;
        double weight;
    };

    SparseVector() = default;

    /// Sorts, prunes zeros, rejects negatives and duplicate term ids.
    static SparseVector from_entries(std::vector<Entry> entries);

    std::size_t nnz() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::span<const Entry> entries() const { return entries_; }
    double weight_of(std::uint32_t term) const;

  private:
    std::vector<Entry> entries_;
};

/// Maps an interchange vector into a dictionary id space. With
/// `register_terms`, unseen terms are added to the dictionary; otherwise they
/// are dropped (they can never match any indexed document).
SparseVector to_sparse_vector(const ExternalSparseVector& vec, TermDictionary& dict,
                              bool register_terms);
SparseVector to_sparse_vector(const ExternalSparseVector& vec, const TermDictionary& dict);

double dot(const SparseVector& a, const SparseVector& b);

/// Hadamard reweighting of a document vector by IDF weights; entries whose
/// weight becomes zero (terms occurring in every document) are pruned.
/// Applies to document vectors only — query vectors stay unweighted.
SparseVector apply_idf(const SparseVector& doc, const IdfVector& idf);

double score_splade(const SparseVector& query, const SparseVector& doc);

/// Bag-of-words scoring: sums the document weights of the query tokens,
/// counting a token once per occurrence. Unknown tokens contribute 0.
double score_splade_doc(const AnalyzedText& query_tokens, const TermDictionary& dict,
                        const SparseVector& doc);

double score_hybrid(double bm25, double sparse);

/// Postings of precomputed impact weights, one list per term. When built with
/// an IdfVector the weights are reweighted once at build time and the vector
/// is kept as a snapshot.
class ImpactIndex {
  public:
    /// `corpus_docs`, when given, fixes the internal id space and every vector
    /// id must reference it; otherwise vector order defines the doc table.
    static ImpactIndex build(const std::vector<ExternalSparseVector>& vectors,
                             std::shared_ptr<TermDictionary> dict,
                             const DocTable* corpus_docs = nullptr,
                             const IdfVector* idf = nullptr);

    std::size_t doc_count() const { return docs_.size(); }
    std::span<const Posting> postings(std::uint32_t term) const;
    const DocTable& docs() const { return docs_; }
    const TermDictionary& dict() const { return *dict_; }
    const std::shared_ptr<TermDictionary>& dict_ptr() const { return dict_; }
    const std::optional<IdfVector>& stored_idf() const { return stored_idf_; }

    /// reconstructs the document vector from postings (test/oracle support)
    SparseVector doc_vector(std::uint32_t internal) const;

    // used by persistence
    const std::vector<std::vector<Posting>>& raw_postings() const { return postings_; }
    static ImpactIndex from_parts(std::shared_ptr<TermDictionary> dict, DocTable docs,
                                  std::vector<std::vector<Posting>> postings,
                                  std::optional<IdfVector> stored_idf);

  private:
    ImpactIndex() = default;
    std::shared_ptr<TermDictionary> dict_;
    DocTable docs_;
    std::vector<std::vector<Posting>> postings_;
    std::optional<IdfVector> stored_idf_;
};

std::vector<SearchHit> splade_search(const ImpactIndex& index, const SparseVector& query,
                                     std::size_t k);
std::vector<SearchHit> splade_doc_search(const ImpactIndex& index, const AnalyzedText& query,
                                         std::size_t k);

enum class SearchMode { Bm25, Splade, SpladeDoc, HybridSplade, HybridSpladeDoc };

std::optional<SearchMode> parse_search_mode(std::string_view name);
std::string_view search_mode_name(SearchMode mode);

/// Exhaustive (exact) searcher over a lexical and/or impact index. Hybrid
/// modes require both indexes over the same document set.
class Searcher {
  public:
    Searcher(const InvertedIndex* lexical, const ImpactIndex* impact, Bm25Params params = {});

    struct QueryInput {
        AnalyzedText tokens;               // used by bm25 / splade-doc / hybrids
        std::optional<SparseVector> vec;   // used by splade / hybrid-splade
    };

    std::vector<SearchHit> search(const QueryInput& query, SearchMode mode, std::size_t k) const;

  private:
    const InvertedIndex* lexical_;
    const ImpactIndex* impact_;
    Bm25Params params_;
    std::vector<std::uint32_t> impact_to_lexical_;  // set when both indexes present
};

}  // namespace sparsekit
