#include "sparsekit/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sparsekit {

void sort_hits(std::vector<SearchHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

InvertedIndex InvertedIndex::build(const std::vector<Document>& docs,
                                   const AnalyzerConfig& analyzer,
                                   std::shared_ptr<TermDictionary> dict) {
    if (docs.empty()) throw std::invalid_argument("cannot index an empty document collection");
    InvertedIndex index;
    index.dict_ = dict ? std::move(dict) : std::make_shared<TermDictionary>();
    for (const auto& doc : docs) {
        if (doc.doc_id.empty()) throw std::runtime_error("document with empty id");
        std::uint32_t internal = index.docs_.add(doc.doc_id);
        AnalyzedText analyzed = analyze(doc.indexed_text(), analyzer);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(analyzed.tokens.size()));
        std::map<std::uint32_t, double> tf;
        for (const auto& token : analyzed.tokens) tf[index.dict_->add(token)] += 1.0;
        if (index.postings_.size() < index.dict_->size()) index.postings_.resize(index.dict_->size());
        for (const auto& [term, freq] : tf) index.postings_[term].push_back({internal, freq});
    }
    if (index.postings_.size() < index.dict_->size()) index.postings_.resize(index.dict_->size());
    return index;
}

InvertedIndex InvertedIndex::from_parts(std::shared_ptr<TermDictionary> dict, DocTable docs,
                                        std::vector<std::vector<Posting>> postings,
                                        std::vector<std::uint32_t> doc_lengths) {
    InvertedIndex index;
    index.dict_ = std::move(dict);
    index.docs_ = std::move(docs);
    index.postings_ = std::move(postings);
    index.doc_lengths_ = std::move(doc_lengths);
    if (index.postings_.size() < index.dict_->size()) index.postings_.resize(index.dict_->size());
    return index;
}

std::span<const Posting> InvertedIndex::postings(std::uint32_t term) const {
    if (term >= postings_.size()) return {};
    return postings_[term];
}

double InvertedIndex::avg_doc_length() const {
    if (doc_lengths_.empty()) return 0.0;
    double total = 0.0;
    for (auto len : doc_lengths_) total += len;
    return total / static_cast<double>(doc_lengths_.size());
}

bool InvertedIndex::doc_contains(std::uint32_t term, std::uint32_t internal) const {
    auto list = postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), internal,
                               [](const Posting& p, std::uint32_t doc) { return p.doc < doc; });
    return it != list.end() && it->doc == internal;
}

IdfVector idf_vector(const InvertedIndex& index, double log_base) {
    if (log_base <= 0.0 || log_base == 1.0)
        throw std::invalid_argument("log base must be positive and != 1");
    const double scale = 1.0 / std::log(log_base);
    const double n = static_cast<double>(index.doc_count());
    std::vector<double> weights(index.dict().size(), 1.0);
    for (std::uint32_t term = 0; term < weights.size(); ++term) {
        std::size_t df = index.doc_freq(term);
        if (df > 0) weights[term] = std::log(n / static_cast<double>(df)) * scale;
    }
    return IdfVector(std::move(weights), 1.0);
}

namespace {

double bm25_idf(std::size_t doc_count, std::size_t doc_freq, double log_base) {
    double n = static_cast<double>(doc_count);
    double df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5)) / std::log(log_base);
}

double bm25_tf_term(double tf, double doc_len, double avgdl, const Bm25Params& params) {
    double norm = params.k1 * (1.0 - params.b + params.b * doc_len / avgdl);
    return tf / (tf + norm);
}

}  // namespace

double bm25_score(const InvertedIndex& index, const AnalyzedText& query,
                  const std::string& doc_id, const Bm25Params& params) {
    auto internal = index.docs().find(doc_id);
    if (!internal) throw std::runtime_error("unknown document id \"" + doc_id + "\"");
    const double avgdl = index.avg_doc_length();
    const double doc_len = static_cast<double>(index.doc_length(*internal));
    double score = 0.0;
    for (const auto& token : query.tokens) {
        auto term = index.dict().find(token);
        if (!term) continue;
        auto list = index.postings(*term);
        if (list.empty()) continue;
        auto it = std::lower_bound(list.begin(), list.end(), *internal,
                                   [](const Posting& p, std::uint32_t doc) { return p.doc < doc; });
        if (it == list.end() || it->doc != *internal) continue;
        score += bm25_idf(index.doc_count(), list.size(), params.log_base) *
                 bm25_tf_term(it->value, doc_len, avgdl, params);
    }
    return score;
}

void accumulate_bm25(const InvertedIndex& index, const AnalyzedText& query,
                     const Bm25Params& params, std::vector<double>& scores,
                     std::vector<bool>& touched) {
    const double avgdl = index.avg_doc_length();
    for (const auto& token : query.tokens) {
        auto term = index.dict().find(token);
        if (!term) continue;
        auto list = index.postings(*term);
        if (list.empty()) continue;
        double idf = bm25_idf(index.doc_count(), list.size(), params.log_base);
        for (const auto& posting : list) {
            double doc_len = static_cast<double>(index.doc_length(posting.doc));
            scores[posting.doc] += idf * bm25_tf_term(posting.value, doc_len, avgdl, params);
            touched[posting.doc] = true;
        }
    }
}

std::vector<SearchHit> bm25_search(const InvertedIndex& index, const AnalyzedText& query,
                                   std::size_t k, const Bm25Params& params) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::vector<double> scores(index.doc_count(), 0.0);
    std::vector<bool> touched(index.doc_count(), false);
    accumulate_bm25(index, query, params, scores, touched);
    std::vector<SearchHit> hits;
    for (std::uint32_t doc = 0; doc < scores.size(); ++doc)
        if (touched[doc]) hits.push_back({index.docs().id(doc), scores[doc]});
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace sparsekit
