#include "sparsekit/training.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "sparsekit/util.hpp"

namespace sparsekit {

double margin_mse(std::span<const double> student_margins,
                  std::span<const double> teacher_margins) {
    if (student_margins.size() != teacher_margins.size())
        throw std::invalid_argument("margin_mse: margin lists differ in length");
    if (student_margins.empty())
        throw std::invalid_argument("margin_mse: batch must be non-empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < student_margins.size(); ++i) {
        double diff = teacher_margins[i] - student_margins[i];
        sum += diff * diff;
    }
    return sum / static_cast<double>(student_margins.size());
}

double flops(const std::vector<std::vector<double>>& batch_matrix) {
    if (batch_matrix.empty()) throw std::invalid_argument("flops: batch must be non-empty");
    const std::size_t cols = batch_matrix[0].size();
    for (const auto& row : batch_matrix)
        if (row.size() != cols) throw std::invalid_argument("flops: ragged batch matrix");
    const double inv_b = 1.0 / static_cast<double>(batch_matrix.size());
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        double mean_abs = 0.0;
        for (const auto& row : batch_matrix) mean_abs += std::abs(row[j]);
        mean_abs *= inv_b;
        total += mean_abs * mean_abs;
    }
    return total;
}

namespace {

// d flops / d M[i][j] = 2 * colmean_j / B for positive entries (head outputs
// are never negative; zero entries get zero, matching the relu-gated path)
std::vector<double> flops_column_means(const std::vector<std::vector<double>>& rows) {
    std::vector<double> means(rows[0].size(), 0.0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < row.size(); ++j) means[j] += std::abs(row[j]);
    const double inv_b = 1.0 / static_cast<double>(rows.size());
    for (auto& m : means) m *= inv_b;
    return means;
}

struct Encoding {
    std::vector<std::uint32_t> rows;
    TokenEmbeddingSequence tokens;
    std::vector<double> output;  // dense vocab-sized vector
    std::size_t nnz = 0;
};

Encoding encode_dense(const SpladeHead& head, const std::vector<std::string>& tokens) {
    Encoding enc;
    enc.rows = head.token_rows(tokens);
    enc.tokens = head.gather(enc.rows);
    enc.output = head_forward_dense(head.params(), enc.tokens);
    for (double v : enc.output)
        if (v > 0.0) ++enc.nnz;
    return enc;
}

double dense_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

}  // namespace

LossResult total_loss(const TripletBatch& batch, const SpladeHead& head,
                      const LossWeights& weights) {
    if (batch.rows.empty()) throw std::invalid_argument("total_loss: batch must be non-empty");
    if (weights.lambda_q < 0.0 || weights.lambda_d < 0.0)
        throw std::invalid_argument("total_loss: loss weights must be non-negative");
    const std::size_t batch_size = batch.rows.size();
    const std::size_t vocab = head.vocab_size();

    std::vector<Encoding> queries, positives, negatives;
    queries.reserve(batch_size);
    positives.reserve(batch_size);
    negatives.reserve(batch_size);
    for (const auto& row : batch.rows) {
        queries.push_back(encode_dense(head, row.query_tokens));
        positives.push_back(encode_dense(head, row.pos_tokens));
        negatives.push_back(encode_dense(head, row.neg_tokens));
    }

    LossResult result;
    result.student_margins.resize(batch_size);
    std::vector<double> teacher_margins(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        result.student_margins[i] =
            dense_dot(queries[i].output, positives[i].output) -
            dense_dot(queries[i].output, negatives[i].output);
        teacher_margins[i] = batch.rows[i].teacher_margin;
    }
    result.margin_term = margin_mse(result.student_margins, teacher_margins);

    std::vector<std::vector<double>> query_matrix, doc_matrix;
    query_matrix.reserve(batch_size);
    doc_matrix.reserve(2 * batch_size);
    for (const auto& q : queries) query_matrix.push_back(q.output);
    for (const auto& p : positives) doc_matrix.push_back(p.output);
    for (const auto& n : negatives) doc_matrix.push_back(n.output);
    result.query_flops = flops(query_matrix);
    result.doc_flops = flops(doc_matrix);
    result.loss = result.margin_term + weights.lambda_q * result.query_flops +
                  weights.lambda_d * result.doc_flops;

    std::size_t nnz_total = 0;
    for (const auto& p : positives) nnz_total += p.nnz;
    for (const auto& n : negatives) nnz_total += n.nnz;
    result.mean_doc_nnz = static_cast<double>(nnz_total) / static_cast<double>(2 * batch_size);

    // upstream gradients w.r.t. each dense encoding
    std::vector<double> query_colmeans = flops_column_means(query_matrix);
    std::vector<double> doc_colmeans = flops_column_means(doc_matrix);
    const double q_scale = 2.0 * weights.lambda_q / static_cast<double>(batch_size);
    const double d_scale = 2.0 * weights.lambda_d / static_cast<double>(2 * batch_size);

    result.grads = HeadGradients::zeros(head.params(), 0);
    auto backprop = [&](const Encoding& enc, const std::vector<double>& upstream) {
        HeadGradients g = head_backward(head.params(), enc.tokens, upstream);
        result.grads.add_scaled(g, 1.0);
        // fold input-path token gradients back into the tied embedding rows
        for (std::size_t i = 0; i < enc.rows.size(); ++i) {
            double* row = result.grads.embedding.data() +
                          static_cast<std::size_t>(enc.rows[i]) * head.dim();
            for (std::size_t c = 0; c < head.dim(); ++c) row[c] += g.tokens[i][c];
        }
    };

    for (std::size_t i = 0; i < batch_size; ++i) {
        double margin_up =
            (2.0 / static_cast<double>(batch_size)) *
            (result.student_margins[i] - teacher_margins[i]);
        std::vector<double> up_q(vocab), up_p(vocab), up_n(vocab);
        for (std::size_t v = 0; v < vocab; ++v) {
            up_q[v] = margin_up * (positives[i].output[v] - negatives[i].output[v]) +
                      (queries[i].output[v] > 0.0 ? q_scale * query_colmeans[v] : 0.0);
            up_p[v] = margin_up * queries[i].output[v] +
                      (positives[i].output[v] > 0.0 ? d_scale * doc_colmeans[v] : 0.0);
            up_n[v] = -margin_up * queries[i].output[v] +
                      (negatives[i].output[v] > 0.0 ? d_scale * doc_colmeans[v] : 0.0);
        }
        backprop(queries[i], up_q);
        backprop(positives[i], up_p);
        backprop(negatives[i], up_n);
    }
    return result;
}

ToyTrainResult train_toy(const TripletBatch& batch, std::vector<std::string> vocab_terms,
                         const ToyTrainConfig& config) {
    if (config.steps < 1) throw std::invalid_argument("train_toy: steps must be >= 1");
    if (config.learning_rate <= 0.0)
        throw std::invalid_argument("train_toy: learning rate must be > 0");
    if (batch.rows.empty()) throw std::invalid_argument("train_toy: batch must be non-empty");

    SpladeHead head = SpladeHead::random_init(std::move(vocab_terms), config.dim, config.seed);
    std::vector<TrainStepMetrics> metrics;
    metrics.reserve(config.steps + 1);

    LossResult current = total_loss(batch, head, config.weights);
    if (!std::isfinite(current.loss))
        throw std::runtime_error("train_toy: non-finite loss at step 0");
    metrics.push_back({0, current.loss, current.mean_doc_nnz});
    for (std::size_t step = 1; step <= config.steps; ++step) {
        auto& params = head.params();
        auto apply = [&](std::vector<double>& dst, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < dst.size(); ++i)
                dst[i] -= config.learning_rate * grad[i];
        };
        apply(params.embedding, current.grads.embedding);
        apply(params.vocab_bias, current.grads.vocab_bias);
        apply(params.proj, current.grads.proj);
        apply(params.proj_bias, current.grads.proj_bias);
        apply(params.ln_gain, current.grads.ln_gain);
        apply(params.ln_offset, current.grads.ln_offset);

        current = total_loss(batch, head, config.weights);
        if (!std::isfinite(current.loss))
            throw std::runtime_error("train_toy: non-finite loss at step " +
                                     std::to_string(step));
        metrics.push_back({step, current.loss, current.mean_doc_nnz});
    }
    return {std::move(head), std::move(metrics)};
}

std::vector<TripletSpec> load_triplets(const std::string& path) {
    using nlohmann::json;
    auto lines = read_lines(path);
    std::vector<TripletSpec> triplets;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                                     ": malformed record: " + e.what());
        }
        TripletSpec t;
        try {
            t.query_id = record.at("query_id").get<std::string>();
            t.pos_id = record.at("pos_id").get<std::string>();
            t.neg_id = record.at("neg_id").get<std::string>();
            t.teacher_margin = record.at("teacher_margin").get<double>();
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                                     ": bad triplet record: " + e.what());
        }
        if (!std::isfinite(t.teacher_margin))
            throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                                     ": teacher margin must be finite");
        triplets.push_back(std::move(t));
    }
    return triplets;
}

void save_triplets(const std::string& path, const std::vector<TripletSpec>& triplets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (const auto& t : triplets) {
        nlohmann::ordered_json record;
        record["query_id"] = t.query_id;
        record["pos_id"] = t.pos_id;
        record["neg_id"] = t.neg_id;
        record["teacher_margin"] = t.teacher_margin;
        out << record.dump() << '\n';
    }
}

}  // namespace sparsekit
