#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsekit/corpus.hpp"
#include "sparsekit/embeddings.hpp"
#include "sparsekit/sparse.hpp"

namespace sparsekit {

/// Parameters of the encoding head. Per token vector t:
///   u = proj * t + proj_bias
///   h = layer_norm(gelu(u)) * ln_gain + ln_offset
///   pre[v] = embedding[v] . h + vocab_bias[v]        (tied embedding matrix)
/// and the text-level output is the elementwise max over tokens of
/// log(1 + relu(pre)), pruned to its positive entries.
struct HeadParams {
    std::size_t vocab_size = 0;
    std::size_t dim = 0;
    std::uint64_t seed = 0;

    std::vector<double> embedding;   // vocab_size x dim, row-major
    std::vector<double> vocab_bias;  // vocab_size
    std::vector<double> proj;        // dim x dim, row-major
    std::vector<double> proj_bias;   // dim
    std::vector<double> ln_gain;     // dim
    std::vector<double> ln_offset;   // dim

    /// All parameters drawn uniform(-0.1, 0.1) from the seed, in field order.
    static HeadParams random_init(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

    double* embedding_row(std::size_t v) { return embedding.data() + v * dim; }
    const double* embedding_row(std::size_t v) const { return embedding.data() + v * dim; }
};

struct HeadGradients {
    std::vector<double> embedding;
    std::vector<double> vocab_bias;
    std::vector<double> proj;
    std::vector<double> proj_bias;
    std::vector<double> ln_gain;
    std::vector<double> ln_offset;
    std::vector<std::vector<double>> tokens;  // one gradient per input token vector

    static HeadGradients zeros(const HeadParams& params, std::size_t n_tokens);
    void add_scaled(const HeadGradients& other, double scale);
};

/// Input token vectors; includes the leading/trailing sentinel embeddings, so
/// a valid sequence has at least two rows.
using TokenEmbeddingSequence = std::vector<std::vector<double>>;

/// Full vocabulary-sized output (zeros included); the sparse form is this with
/// zero entries pruned.
std::vector<double> head_forward_dense(const HeadParams& params,
                                       const TokenEmbeddingSequence& tokens);
SparseVector head_forward(const HeadParams& params, const TokenEmbeddingSequence& tokens);

/// Analytic gradients of sum(upstream * output) with respect to every
/// parameter and every token vector. At max-pool ties the subgradient goes to
/// the lowest token index.
HeadGradients head_backward(const HeadParams& params, const TokenEmbeddingSequence& tokens,
                            std::span<const double> upstream);

/// Head plus its vocabulary (term per embedding row). Rows 0 and 1 are the
/// CLS/SEP sentinels unless the supplied term list already contains them.
class SpladeHead {
  public:
    static constexpr const char* kClsToken = "[CLS]";
    static constexpr const char* kSepToken = "[SEP]";

    SpladeHead(HeadParams params, std::vector<std::string> terms);

    static SpladeHead random_init(std::vector<std::string> terms, std::size_t dim,
                                  std::uint64_t seed);

    /// Head whose embedding rows come from the table; remaining parameters
    /// (and sentinel rows missing from the table) are seeded.
    static SpladeHead from_embeddings(const EmbeddingTable& table, std::uint64_t seed);

    const HeadParams& params() const { return params_; }
    HeadParams& params() { return params_; }
    const std::vector<std::string>& terms() const { return terms_; }
    std::size_t vocab_size() const { return params_.vocab_size; }
    std::size_t dim() const { return params_.dim; }

    /// Row index of a term, or -1 when out of vocabulary.
    std::int64_t row_of(const std::string& term) const;

    /// Maps tokens to rows (OOV skipped, reported once per term in
    /// `oov_warnings` when non-null) and wraps them in sentinels.
    std::vector<std::uint32_t> token_rows(const std::vector<std::string>& tokens,
                                          std::vector<std::string>* oov_warnings = nullptr) const;

    TokenEmbeddingSequence gather(const std::vector<std::uint32_t>& rows) const;

    SparseVector encode_rows(const std::vector<std::uint32_t>& rows) const;
    ExternalSparseVector encode(const std::string& id, const std::vector<std::string>& tokens,
                                std::vector<std::string>* oov_warnings = nullptr) const;

  private:
    HeadParams params_;
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> row_index_;
};

/// Encodes every document (analyzed tokens) into interchange vectors usable
/// by the impact index exactly like externally supplied ones.
std::vector<ExternalSparseVector> encode_corpus(const SpladeHead& head,
                                                const std::vector<Document>& docs,
                                                const AnalyzerConfig& analyzer,
                                                std::vector<std::string>* oov_warnings = nullptr);

// Single-file binary serialization (magic, version, |V|, dim, seed, then the
// parameter blocks in declaration order). Term strings live in vocabulary /
// embedding files, not here.
void save_head_params(const std::string& path, const HeadParams& params);
HeadParams load_head_params(const std::string& path);

}  // namespace sparsekit
