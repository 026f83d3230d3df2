#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sparsekit/corpus.hpp"
#include "sparsekit/lexical.hpp"
#include "sparsekit/trec.hpp"

namespace sparsekit {

/// Smoothed term-separation weight from a 2x2 contingency table
/// (add-0.5 smoothing on all four counts):
///   ln[(r + 0.5)(N - R - n + r + 0.5) / ((R - r + 0.5)(n - r + 0.5))]
/// N = docs, R = relevant docs, n = docs containing the term, r = relevant
/// docs containing the term.
double rsj_from_counts(std::size_t doc_count, std::size_t relevant, std::size_t with_term,
                       std::size_t relevant_with_term);

struct RsjWeight {
    double value = 0.0;
    bool degenerate = false;  // term absent from the whole corpus (n = 0)
};

/// Ideal weights per analyzed query token, from the graded judgments.
/// nullopt when the query has no relevant document in the index.
std::optional<std::map<std::string, RsjWeight>> rsj_ideal(const InvertedIndex& index,
                                                          const QrelSet& qrels,
                                                          const Query& query,
                                                          const AnalyzerConfig& analyzer);

/// Same weights with the relevant set replaced by the top-K retrieved set.
/// nullopt when the run has no results for the query.
std::optional<std::map<std::string, RsjWeight>> rsj_model(const InvertedIndex& index,
                                                          const std::vector<RunEntry>& ranked,
                                                          const Query& query, std::size_t top_k,
                                                          const AnalyzerConfig& analyzer);

/// ideal minus model; positive values mean the model underrates the token.
double delta_rsj(double ideal, double model);

enum class IdfBucket { High, Low };
enum class RsjBucket { High, Low };

struct RsjRow {
    std::string query_id;
    std::string token;
    double rsj_ideal = 0.0;
    double rsj_model = 0.0;
    double delta = 0.0;
    double idf = 0.0;
    IdfBucket idf_bucket = IdfBucket::Low;
    RsjBucket rsj_bucket = RsjBucket::Low;
    bool degenerate = false;
};

struct BucketMean {
    std::size_t count = 0;
    double mean_delta = 0.0;
};

struct RsjReport {
    std::size_t top_k = 100;
    double rsj_threshold = 0.0;  // 75-percentile of ideal weights
    double idf_threshold = 0.0;  // median corpus IDF of unique query tokens
    std::vector<RsjRow> rows;
    std::map<std::pair<std::string, std::string>, BucketMean> bucket_means;
    std::vector<std::string> notices;  // skipped queries etc.
};

/// Threshold of the top (100-pct)% block: the ceil((1-pct/100)*n)-th largest
/// value. Values >= threshold belong to the high bucket, so ties at the
/// threshold land high.
double percentile_threshold(std::vector<double> values, double pct);

/// Full analysis: per-(query, token) ideal/model weights and deltas, bucketed
/// at the 75-percentile of ideal weights and the median IDF over unique query
/// token types, with per-bucket mean deltas.
RsjReport build_rsj_report(const InvertedIndex& index, const QrelSet& qrels,
                           const std::vector<Query>& queries, const TrecRun& run,
                           std::size_t top_k, const AnalyzerConfig& analyzer,
                           double log_base = std::numbers::e);

/// Tab-separated rows with a `#` header block recording K, smoothing and the
/// bucket thresholds.
void write_rsj_report(std::ostream& out, const RsjReport& report,
                      const std::optional<std::string>& timestamp = std::nullopt);

/// Normalized term-frequency distribution (sums to 1).
class TermDistribution {
  public:
    static TermDistribution from_counts(const std::map<std::string, std::size_t>& counts);
    static TermDistribution from_corpus(const std::vector<Document>& docs,
                                        const AnalyzerConfig& analyzer);

    const std::map<std::string, double>& freqs() const { return freqs_; }
    bool empty() const { return freqs_.empty(); }

  private:
    std::map<std::string, double> freqs_;
};

/// sum of min over sum of max of the two distributions; in [0, 1], symmetric.
double weighted_jaccard(const TermDistribution& a, const TermDistribution& b);

struct NdcgResult {
    std::map<std::string, double> per_query;
    double mean = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped_no_relevant = 0;  // judged queries without relevant docs
    std::size_t skipped_unknown = 0;      // run queries absent from the qrels
};

/// Linear gain, log2(rank+1) discount, cutoff 10 by default. Queries without
/// relevant documents are excluded from the mean; unknown query ids are
/// skipped and counted.
NdcgResult ndcg_at_k(const TrecRun& run, const QrelSet& qrels, std::size_t cutoff = 10);

}  // namespace sparsekit
