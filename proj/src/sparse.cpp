#include "sparsekit/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace sparsekit {

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.term < b.term; });
    SparseVector vec;
    vec.entries_.reserve(entries.size());
    std::uint32_t last_term = 0;
    bool first = true;
    for (const auto& entry : entries) {
        if (entry.weight < 0.0)
            throw std::invalid_argument("sparse vector weight must be >= 0");
        if (!first && entry.term == last_term)
            throw std::invalid_argument("duplicate term id in sparse vector");
        last_term = entry.term;
        first = false;
        if (entry.weight > 0.0) vec.entries_.push_back(entry);
    }
    return vec;
}

double SparseVector::weight_of(std::uint32_t term) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                               [](const Entry& e, std::uint32_t t) { return e.term < t; });
    if (it == entries_.end() || it->term != term) return 0.0;
    return it->weight;
}

SparseVector to_sparse_vector(const ExternalSparseVector& vec, TermDictionary& dict,
                              bool register_terms) {
    std::vector<SparseVector::Entry> entries;
    entries.reserve(vec.weights.size());
    for (const auto& [term, weight] : vec.weights) {
        if (register_terms) {
            entries.push_back({dict.add(term), weight});
        } else if (auto id = dict.find(term)) {
            entries.push_back({*id, weight});
        }
    }
    return SparseVector::from_entries(std::move(entries));
}

SparseVector to_sparse_vector(const ExternalSparseVector& vec, const TermDictionary& dict) {
    std::vector<SparseVector::Entry> entries;
    entries.reserve(vec.weights.size());
    for (const auto& [term, weight] : vec.weights)
        if (auto id = dict.find(term)) entries.push_back({*id, weight});
    return SparseVector::from_entries(std::move(entries));
}

double dot(const SparseVector& a, const SparseVector& b) {
    auto ea = a.entries();
    auto eb = b.entries();
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < ea.size() && j < eb.size()) {
        if (ea[i].term < eb[j].term) {
            ++i;
        } else if (eb[j].term < ea[i].term) {
            ++j;
        } else {
            sum += ea[i].weight * eb[j].weight;
            ++i;
            ++j;
        }
    }
    return sum;
}

SparseVector apply_idf(const SparseVector& doc, const IdfVector& idf) {
    std::vector<SparseVector::Entry> entries;
    entries.reserve(doc.nnz());
    for (const auto& entry : doc.entries())
        entries.push_back({entry.term, entry.weight * idf.weight(entry.term)});
    return SparseVector::from_entries(std::move(entries));
}

double score_splade(const SparseVector& query, const SparseVector& doc) {
    return dot(query, doc);
}

double score_splade_doc(const AnalyzedText& query_tokens, const TermDictionary& dict,
                        const SparseVector& doc) {
    double sum = 0.0;
    for (const auto& token : query_tokens.tokens)
        if (auto term = dict.find(token)) sum += doc.weight_of(*term);
    return sum;
}

double score_hybrid(double bm25, double sparse) { return bm25 + sparse; }

ImpactIndex ImpactIndex::build(const std::vector<ExternalSparseVector>& vectors,
                               std::shared_ptr<TermDictionary> dict, const DocTable* corpus_docs,
                               const IdfVector* idf) {
    ImpactIndex index;
    index.dict_ = dict ? std::move(dict) : std::make_shared<TermDictionary>();
    if (corpus_docs) {
        for (const auto& id : corpus_docs->ids()) index.docs_.add(id);
    }
    std::unordered_set<std::string> seen;
    for (const auto& vec : vectors) {
        if (!seen.insert(vec.id).second)
            throw std::runtime_error("duplicate sparse vector id \"" + vec.id + "\"");
        std::uint32_t internal;
        if (corpus_docs) {
            auto found = index.docs_.find(vec.id);
            if (!found)
                throw std::runtime_error("sparse vector references unknown document id \"" +
                                         vec.id + "\"");
            internal = *found;
        } else {
            internal = index.docs_.add(vec.id);
        }
        SparseVector sparse = to_sparse_vector(vec, *index.dict_, /*register_terms=*/true);
        if (idf) sparse = apply_idf(sparse, *idf);
        if (index.postings_.size() < index.dict_->size())
            index.postings_.resize(index.dict_->size());
        for (const auto& entry : sparse.entries())
            index.postings_[entry.term].push_back({internal, entry.weight});
    }
    if (index.postings_.size() < index.dict_->size()) index.postings_.resize(index.dict_->size());
    // postings were appended in vector-file order; internal ids of a fixed
    // corpus table may be out of order
    for (auto& list : index.postings_)
        std::sort(list.begin(), list.end(),
                  [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    if (idf) index.stored_idf_ = *idf;
    return index;
}

ImpactIndex ImpactIndex::from_parts(std::shared_ptr<TermDictionary> dict, DocTable docs,
                                    std::vector<std::vector<Posting>> postings,
                                    std::optional<IdfVector> stored_idf) {
    ImpactIndex index;
    index.dict_ = std::move(dict);
    index.docs_ = std::move(docs);
    index.postings_ = std::move(postings);
    index.stored_idf_ = std::move(stored_idf);
    if (index.postings_.size() < index.dict_->size()) index.postings_.resize(index.dict_->size());
    return index;
}

std::span<const Posting> ImpactIndex::postings(std::uint32_t term) const {
    if (term >= postings_.size()) return {};
    return postings_[term];
}

SparseVector ImpactIndex::doc_vector(std::uint32_t internal) const {
    std::vector<SparseVector::Entry> entries;
    for (std::uint32_t term = 0; term < postings_.size(); ++term) {
        for (const auto& posting : postings_[term])
            if (posting.doc == internal) entries.push_back({term, posting.value});
    }
    return SparseVector::from_entries(std::move(entries));
}

namespace {

// accumulates per-document scores for the terms of `query` and marks docs hit
void accumulate_impact(const ImpactIndex& index, const SparseVector& query,
                       std::vector<double>& scores, std::vector<bool>& touched) {
    for (const auto& entry : query.entries()) {
        for (const auto& posting : index.postings(entry.term)) {
            scores[posting.doc] += entry.weight * posting.value;
            touched[posting.doc] = true;
        }
    }
}

void accumulate_impact_bow(const ImpactIndex& index, const AnalyzedText& query,
                           std::vector<double>& scores, std::vector<bool>& touched) {
    for (const auto& token : query.tokens) {
        auto term = index.dict().find(token);
        if (!term) continue;
        for (const auto& posting : index.postings(*term)) {
            scores[posting.doc] += posting.value;
            touched[posting.doc] = true;
        }
    }
}

std::vector<SearchHit> collect_hits(const DocTable& docs, const std::vector<double>& scores,
                                    const std::vector<bool>& touched, std::size_t k) {
    std::vector<SearchHit> hits;
    for (std::uint32_t doc = 0; doc < scores.size(); ++doc)
        if (touched[doc]) hits.push_back({docs.id(doc), scores[doc]});
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace

std::vector<SearchHit> splade_search(const ImpactIndex& index, const SparseVector& query,
                                     std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::vector<double> scores(index.doc_count(), 0.0);
    std::vector<bool> touched(index.doc_count(), false);
    accumulate_impact(index, query, scores, touched);
    return collect_hits(index.docs(), scores, touched, k);
}

std::vector<SearchHit> splade_doc_search(const ImpactIndex& index, const AnalyzedText& query,
                                         std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::vector<double> scores(index.doc_count(), 0.0);
    std::vector<bool> touched(index.doc_count(), false);
    accumulate_impact_bow(index, query, scores, touched);
    return collect_hits(index.docs(), scores, touched, k);
}

std::optional<SearchMode> parse_search_mode(std::string_view name) {
    if (name == "bm25") return SearchMode::Bm25;
    if (name == "splade") return SearchMode::Splade;
    if (name == "splade-doc") return SearchMode::SpladeDoc;
    if (name == "hybrid-splade") return SearchMode::HybridSplade;
    if (name == "hybrid-splade-doc") return SearchMode::HybridSpladeDoc;
    return std::nullopt;
}

std::string_view search_mode_name(SearchMode mode) {
    switch (mode) {
        case SearchMode::Bm25: return "bm25";
        case SearchMode::Splade: return "splade";
        case SearchMode::SpladeDoc: return "splade-doc";
        case SearchMode::HybridSplade: return "hybrid-splade";
        case SearchMode::HybridSpladeDoc: return "hybrid-splade-doc";
    }
    return "unknown";
}

Searcher::Searcher(const InvertedIndex* lexical, const ImpactIndex* impact, Bm25Params params)
    : lexical_(lexical), impact_(impact), params_(params) {
    if (lexical_ && impact_) {
        if (!lexical_->docs().same_id_set(impact_->docs()))
            throw std::runtime_error(
                "lexical and impact indexes cover different document sets");
        impact_to_lexical_.resize(impact_->doc_count());
        for (std::uint32_t doc = 0; doc < impact_->doc_count(); ++doc)
            impact_to_lexical_[doc] = *lexical_->docs().find(impact_->docs().id(doc));
    }
}

std::vector<SearchHit> Searcher::search(const QueryInput& query, SearchMode mode,
                                        std::size_t k) const {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    const bool needs_lexical =
        mode == SearchMode::Bm25 || mode == SearchMode::HybridSplade ||
        mode == SearchMode::HybridSpladeDoc;
    const bool needs_impact = mode != SearchMode::Bm25;
    if (needs_lexical && !lexical_)
        throw std::runtime_error("mode requires a lexical index");
    if (needs_impact && !impact_)
        throw std::runtime_error("mode requires an impact index");
    const bool needs_vec = mode == SearchMode::Splade || mode == SearchMode::HybridSplade;
    if (needs_vec && !query.vec)
        throw std::runtime_error("mode requires a query sparse vector");

    switch (mode) {
        case SearchMode::Bm25:
            return bm25_search(*lexical_, query.tokens, k, params_);
        case SearchMode::Splade:
            return splade_search(*impact_, *query.vec, k);
        case SearchMode::SpladeDoc:
            return splade_doc_search(*impact_, query.tokens, k);
        case SearchMode::HybridSplade:
        case SearchMode::HybridSpladeDoc:
            break;
    }

    // hybrid: bm25 contributions in lexical id space, impact contributions
    // mapped onto it, candidates are the union
    std::vector<double> scores(lexical_->doc_count(), 0.0);
    std::vector<bool> touched(lexical_->doc_count(), false);
    accumulate_bm25(*lexical_, query.tokens, params_, scores, touched);
    std::vector<double> impact_scores(impact_->doc_count(), 0.0);
    std::vector<bool> impact_touched(impact_->doc_count(), false);
    if (mode == SearchMode::HybridSplade)
        accumulate_impact(*impact_, *query.vec, impact_scores, impact_touched);
    else
        accumulate_impact_bow(*impact_, query.tokens, impact_scores, impact_touched);
    for (std::uint32_t doc = 0; doc < impact_scores.size(); ++doc) {
        if (!impact_touched[doc]) continue;
        std::uint32_t target = impact_to_lexical_[doc];
        scores[target] += impact_scores[doc];
        touched[target] = true;
    }
    return collect_hits(lexical_->docs(), scores, touched, k);
}

}  // namespace sparsekit
