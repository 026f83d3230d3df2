#include "sparsekit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "sparsekit/util.hpp"

namespace sparsekit {

double rsj_from_counts(std::size_t doc_count, std::size_t relevant, std::size_t with_term,
                       std::size_t relevant_with_term) {
    const double n_docs = static_cast<double>(doc_count);
    const double r_total = static_cast<double>(relevant);
    const double n_term = static_cast<double>(with_term);
    const double r_term = static_cast<double>(relevant_with_term);
    return std::log(((r_term + 0.5) * (n_docs - r_total - n_term + r_term + 0.5)) /
                    ((r_total - r_term + 0.5) * (n_term - r_term + 0.5)));
}

namespace {

// weights for the analyzed tokens of `query` against an arbitrary "relevant"
// document set given as internal ids
std::map<std::string, RsjWeight> rsj_for_set(const InvertedIndex& index,
                                             const std::vector<std::uint32_t>& relevant_set,
                                             const Query& query,
                                             const AnalyzerConfig& analyzer) {
    std::map<std::string, RsjWeight> weights;
    AnalyzedText analyzed = analyze(query.text, analyzer);
    for (const auto& token : analyzed.tokens) {
        if (weights.count(token)) continue;
        std::size_t with_term = 0;
        std::size_t relevant_with_term = 0;
        if (auto term = index.dict().find(token)) {
            with_term = index.doc_freq(*term);
            for (auto doc : relevant_set)
                if (index.doc_contains(*term, doc)) ++relevant_with_term;
        }
        RsjWeight weight;
        weight.value =
            rsj_from_counts(index.doc_count(), relevant_set.size(), with_term, relevant_with_term);
        weight.degenerate = with_term == 0;
        weights[token] = weight;
    }
    return weights;
}

}  // namespace

std::optional<std::map<std::string, RsjWeight>> rsj_ideal(const InvertedIndex& index,
                                                          const QrelSet& qrels,
                                                          const Query& query,
                                                          const AnalyzerConfig& analyzer) {
    std::vector<std::uint32_t> relevant_set;
    for (const auto& doc_id : qrels.relevant_docs(query.query_id))
        if (auto internal = index.docs().find(doc_id)) relevant_set.push_back(*internal);
    if (relevant_set.empty()) return std::nullopt;
    return rsj_for_set(index, relevant_set, query, analyzer);
}

std::optional<std::map<std::string, RsjWeight>> rsj_model(const InvertedIndex& index,
                                                          const std::vector<RunEntry>& ranked,
                                                          const Query& query, std::size_t top_k,
                                                          const AnalyzerConfig& analyzer) {
    std::vector<std::uint32_t> retrieved;
    std::unordered_set<std::uint32_t> seen;
    for (const auto& entry : ranked) {
        if (retrieved.size() >= top_k) break;
        if (auto internal = index.docs().find(entry.doc_id)) {
            if (seen.insert(*internal).second) retrieved.push_back(*internal);
        }
    }
    if (retrieved.empty()) return std::nullopt;
    return rsj_for_set(index, retrieved, query, analyzer);
}

double delta_rsj(double ideal, double model) { return ideal - model; }

double percentile_threshold(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty list");
    std::sort(values.begin(), values.end(), std::greater<double>());
    double frac = (100.0 - pct) / 100.0;
    auto rank = static_cast<std::size_t>(
        std::ceil(frac * static_cast<double>(values.size())));
    if (rank == 0) rank = 1;
    if (rank > values.size()) rank = values.size();
    return values[rank - 1];
}

RsjReport build_rsj_report(const InvertedIndex& index, const QrelSet& qrels,
                           const std::vector<Query>& queries, const TrecRun& run,
                           std::size_t top_k, const AnalyzerConfig& analyzer, double log_base) {
    RsjReport report;
    report.top_k = top_k;
    IdfVector idf = idf_vector(index, log_base);

    std::vector<Query> ordered = queries;
    std::sort(ordered.begin(), ordered.end(),
              [](const Query& a, const Query& b) { return a.query_id < b.query_id; });

    std::set<std::string> unique_tokens;
    for (const auto& query : ordered) {
        auto ideal = rsj_ideal(index, qrels, query, analyzer);
        if (!ideal) {
            report.notices.push_back("query " + query.query_id +
                                     " skipped: no relevant document in the index");
            continue;
        }
        auto run_it = run.find(query.query_id);
        if (run_it == run.end() || run_it->second.empty()) {
            report.notices.push_back("query " + query.query_id + " skipped: no run results");
            continue;
        }
        auto model = rsj_model(index, run_it->second, query, top_k, analyzer);
        if (!model) {
            report.notices.push_back("query " + query.query_id +
                                     " skipped: no retrieved document in the index");
            continue;
        }
        for (const auto& [token, ideal_weight] : *ideal) {
            RsjRow row;
            row.query_id = query.query_id;
            row.token = token;
            row.rsj_ideal = ideal_weight.value;
            row.rsj_model = (*model)[token].value;
            row.delta = delta_rsj(row.rsj_ideal, row.rsj_model);
            auto term = index.dict().find(token);
            row.idf = term ? idf.weight(*term) : idf.default_weight();
            row.degenerate = ideal_weight.degenerate;
            report.rows.push_back(std::move(row));
            unique_tokens.insert(token);
        }
    }
    if (report.rows.empty()) return report;

    std::vector<double> ideal_values;
    ideal_values.reserve(report.rows.size());
    for (const auto& row : report.rows) ideal_values.push_back(row.rsj_ideal);
    report.rsj_threshold = percentile_threshold(ideal_values, 75.0);

    // median IDF over unique token types across all query rows
    std::vector<double> idf_values;
    for (const auto& token : unique_tokens) {
        auto term = index.dict().find(token);
        idf_values.push_back(term ? idf.weight(*term) : idf.default_weight());
    }
    report.idf_threshold = percentile_threshold(idf_values, 50.0);

    for (auto& row : report.rows) {
        row.rsj_bucket = row.rsj_ideal >= report.rsj_threshold ? RsjBucket::High : RsjBucket::Low;
        row.idf_bucket = row.idf >= report.idf_threshold ? IdfBucket::High : IdfBucket::Low;
        auto key = std::make_pair(
            std::string(row.rsj_bucket == RsjBucket::High ? "HighRSJ" : "LowRSJ"),
            std::string(row.idf_bucket == IdfBucket::High ? "HighIDF" : "LowIDF"));
        auto& bucket = report.bucket_means[key];
        bucket.mean_delta += row.delta;
        ++bucket.count;
    }
    for (auto& [key, bucket] : report.bucket_means)
        if (bucket.count > 0) bucket.mean_delta /= static_cast<double>(bucket.count);
    return report;
}

void write_rsj_report(std::ostream& out, const RsjReport& report,
                      const std::optional<std::string>& timestamp) {
    out << "# sparsekit-rsj-report v1\n";
    out << "# k=" << report.top_k << '\n';
    out << "# smoothing=add-0.5\n";
    out << "# rsj_threshold=" << format_double(report.rsj_threshold)
        << " (75-percentile of ideal weights, ties high)\n";
    out << "# idf_threshold=" << format_double(report.idf_threshold)
        << " (median idf over unique query token types, ties high)\n";
    if (timestamp) out << "# timestamp=" << *timestamp << '\n';
    for (const auto& [key, bucket] : report.bucket_means)
        out << "# mean_delta " << key.first << '/' << key.second << '='
            << format_double(bucket.mean_delta) << " n=" << bucket.count << '\n';
    out << "query_id\ttoken\trsj_ideal\trsj_model\tdelta\tidf\tidf_bucket\trsj_bucket\tdegenerate\n";
    for (const auto& row : report.rows) {
        out << row.query_id << '\t' << row.token << '\t' << format_double(row.rsj_ideal) << '\t'
            << format_double(row.rsj_model) << '\t' << format_double(row.delta) << '\t'
            << format_double(row.idf) << '\t'
            << (row.idf_bucket == IdfBucket::High ? "HighIDF" : "LowIDF") << '\t'
            << (row.rsj_bucket == RsjBucket::High ? "HighRSJ" : "LowRSJ") << '\t'
            << (row.degenerate ? 1 : 0) << '\n';
    }
}

TermDistribution TermDistribution::from_counts(const std::map<std::string, std::size_t>& counts) {
    TermDistribution dist;
    double total = 0.0;
    for (const auto& [term, count] : counts) total += static_cast<double>(count);
    if (total <= 0.0) throw std::invalid_argument("term distribution has no mass");
    for (const auto& [term, count] : counts)
        if (count > 0) dist.freqs_[term] = static_cast<double>(count) / total;
    return dist;
}

TermDistribution TermDistribution::from_corpus(const std::vector<Document>& docs,
                                               const AnalyzerConfig& analyzer) {
    std::map<std::string, std::size_t> counts;
    for (const auto& doc : docs) {
        AnalyzedText analyzed = analyze(doc.indexed_text(), analyzer);
        for (const auto& token : analyzed.tokens) ++counts[token];
    }
    return from_counts(counts);
}

double weighted_jaccard(const TermDistribution& a, const TermDistribution& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("weighted_jaccard: distributions must be non-empty");
    double min_sum = 0.0, max_sum = 0.0;
    auto ia = a.freqs().begin();
    auto ib = b.freqs().begin();
    while (ia != a.freqs().end() || ib != b.freqs().end()) {
        if (ib == b.freqs().end() || (ia != a.freqs().end() && ia->first < ib->first)) {
            max_sum += ia->second;
            ++ia;
        } else if (ia == a.freqs().end() || ib->first < ia->first) {
            max_sum += ib->second;
            ++ib;
        } else {
            min_sum += std::min(ia->second, ib->second);
            max_sum += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    if (max_sum <= 0.0) throw std::invalid_argument("weighted_jaccard: all-zero distributions");
    return min_sum / max_sum;
}

NdcgResult ndcg_at_k(const TrecRun& run, const QrelSet& qrels, std::size_t cutoff) {
    NdcgResult result;
    for (const auto& [query_id, entries] : run) {
        if (!qrels.has_query(query_id)) {
            ++result.skipped_unknown;
            continue;
        }
        // ideal gains: all positive grades, best first
        std::vector<int> grades;
        for (const auto& [doc_id, grade] : qrels.by_query().at(query_id))
            if (grade > 0) grades.push_back(grade);
        if (grades.empty()) {
            ++result.skipped_no_relevant;
            continue;
        }
        std::sort(grades.begin(), grades.end(), std::greater<int>());

        double dcg = 0.0;
        std::size_t depth = std::min(cutoff, entries.size());
        for (std::size_t i = 0; i < depth; ++i) {
            auto grade = qrels.grade(query_id, entries[i].doc_id);
            if (grade && *grade > 0)
                dcg += static_cast<double>(*grade) / std::log2(static_cast<double>(i) + 2.0);
        }
        double ideal_dcg = 0.0;
        for (std::size_t i = 0; i < std::min(cutoff, grades.size()); ++i)
            ideal_dcg += static_cast<double>(grades[i]) / std::log2(static_cast<double>(i) + 2.0);

        double ndcg = dcg / ideal_dcg;
        result.per_query[query_id] = ndcg;
        result.mean += ndcg;
        ++result.evaluated;
    }
    if (result.evaluated > 0) result.mean /= static_cast<double>(result.evaluated);
    return result;
}

}  // namespace sparsekit
