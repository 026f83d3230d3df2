#pragma once

#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sparsekit/analyzer.hpp"
#include "sparsekit/corpus.hpp"
#include "sparsekit/dictionary.hpp"

namespace sparsekit {

struct Posting {
    std::uint32_t doc;   // internal id
    double value;        // term frequency (lexical) or impact weight (sparse)
};

struct SearchHit {
    std::string doc_id;
    double score;
};

/// Ranking order used everywhere: descending score, ties broken by ascending
/// external doc id.
void sort_hits(std::vector<SearchHit>& hits);

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
    double log_base = std::numbers::e;  // natural log by default
};

/// Inverted index over analyzed document text. Immutable once built; safe to
/// share across threads.
class InvertedIndex {
  public:
    static InvertedIndex build(const std::vector<Document>& docs, const AnalyzerConfig& analyzer,
                               std::shared_ptr<TermDictionary> dict = nullptr);

    std::size_t doc_count() const { return docs_.size(); }
    std::span<const Posting> postings(std::uint32_t term) const;
    std::size_t doc_freq(std::uint32_t term) const { return postings(term).size(); }
    std::uint32_t doc_length(std::uint32_t internal) const { return doc_lengths_.at(internal); }
    double avg_doc_length() const;
    const DocTable& docs() const { return docs_; }
    const TermDictionary& dict() const { return *dict_; }
    const std::shared_ptr<TermDictionary>& dict_ptr() const { return dict_; }

    /// true when the doc's posting for `term` exists (term occurs in doc)
    bool doc_contains(std::uint32_t term, std::uint32_t internal) const;

    // used by persistence
    const std::vector<std::vector<Posting>>& raw_postings() const { return postings_; }
    const std::vector<std::uint32_t>& raw_doc_lengths() const { return doc_lengths_; }
    static InvertedIndex from_parts(std::shared_ptr<TermDictionary> dict, DocTable docs,
                                    std::vector<std::vector<Posting>> postings,
                                    std::vector<std::uint32_t> doc_lengths);

  private:
    InvertedIndex() = default;
    std::shared_ptr<TermDictionary> dict_;
    DocTable docs_;
    std::vector<std::vector<Posting>> postings_;  // term id -> sorted postings
    std::vector<std::uint32_t> doc_lengths_;
};

/// Per-term IDF weights: log(N/N_t) for indexed terms, 1 for terms never seen
/// (so reweighting leaves their encoded weights unchanged), 0 exactly when
/// N_t = N.
class IdfVector {
  public:
    IdfVector() = default;
    explicit IdfVector(std::vector<double> weights, double default_weight = 1.0)
        : weights_(std::move(weights)), default_weight_(default_weight) {}

    double weight(std::uint32_t term) const {
        return term < weights_.size() ? weights_[term] : default_weight_;
    }
    std::size_t size() const { return weights_.size(); }
    double default_weight() const { return default_weight_; }
    const std::vector<double>& raw() const { return weights_; }

  private:
    std::vector<double> weights_;
    double default_weight_ = 1.0;
};

IdfVector idf_vector(const InvertedIndex& index, double log_base = std::numbers::e);

/// Lucene-style BM25: idf = log(1 + (N - N_t + 0.5)/(N_t + 0.5)),
/// tf term = tf / (tf + k1 * (1 - b + b * len/avgdl)). Repeated query tokens
/// contribute once per occurrence.
double bm25_score(const InvertedIndex& index, const AnalyzedText& query,
                  const std::string& doc_id, const Bm25Params& params = {});

std::vector<SearchHit> bm25_search(const InvertedIndex& index, const AnalyzedText& query,
                                   std::size_t k, const Bm25Params& params = {});

/// Adds each document's BM25 score for `query` into `scores` and marks it in
/// `touched`; shared by bm25_search and hybrid search so both produce
/// identical floating-point results.
void accumulate_bm25(const InvertedIndex& index, const AnalyzedText& query,
                     const Bm25Params& params, std::vector<double>& scores,
                     std::vector<bool>& touched);

}  // namespace sparsekit
