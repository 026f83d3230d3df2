#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsekit/head.hpp"

namespace sparsekit {

/// One distillation triplet: token lists plus the teacher's score margin.
/// Teacher margins always come from input data; no teacher model lives here.
struct TripletRow {
    std::vector<std::string> query_tokens;
    std::vector<std::string> pos_tokens;
    std::vector<std::string> neg_tokens;
    double teacher_margin = 0.0;
};

struct TripletBatch {
    std::vector<TripletRow> rows;
};

struct LossWeights {
    double lambda_q = 0.08;
    double lambda_d = 0.1;
};

/// Mean squared difference between student and teacher margins.
double margin_mse(std::span<const double> student_margins,
                  std::span<const double> teacher_margins);

/// Sum over columns of the squared column-mean absolute value. Rows are the
/// encoded vectors of one batch; minimizing this drives vectors sparse.
double flops(const std::vector<std::vector<double>>& batch_matrix);

struct LossResult {
    double loss = 0.0;
    double margin_term = 0.0;
    double query_flops = 0.0;
    double doc_flops = 0.0;
    std::vector<double> student_margins;
    double mean_doc_nnz = 0.0;  // over positives and negatives (2B encodings)
    HeadGradients grads;        // d loss / d params, token paths folded into
                                // the tied embedding rows
};

/// Combined objective: margin term plus lambda_q * flops(query matrix) plus
/// lambda_d * flops(document matrix); the document matrix stacks positives
/// then negatives (2B rows). Student margins are dot-product score margins of
/// the encoded vectors.
LossResult total_loss(const TripletBatch& batch, const SpladeHead& head,
                      const LossWeights& weights);

struct TrainStepMetrics {
    std::size_t step = 0;  // 0 = initial parameters, k = after k updates
    double loss = 0.0;
    double mean_doc_nnz = 0.0;
};

struct ToyTrainConfig {
    std::size_t dim = 8;
    double learning_rate = 0.1;
    std::size_t steps = 50;
    std::uint64_t seed = 0;
    LossWeights weights;
};

struct ToyTrainResult {
    SpladeHead head;
    std::vector<TrainStepMetrics> metrics;  // steps + 1 rows
};

/// Full-batch gradient descent with a fixed learning rate. Deterministic
/// given the seed; aborts with the step number if the loss turns non-finite.
ToyTrainResult train_toy(const TripletBatch& batch, std::vector<std::string> vocab_terms,
                         const ToyTrainConfig& config);

/// Line-delimited `{"query_id", "pos_id", "neg_id", "teacher_margin"}` rows.
struct TripletSpec {
    std::string query_id;
    std::string pos_id;
    std::string neg_id;
    double teacher_margin = 0.0;
};

std::vector<TripletSpec> load_triplets(const std::string& path);
void save_triplets(const std::string& path, const std::vector<TripletSpec>& triplets);

}  // namespace sparsekit
