#include "sparsekit/head.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sparsekit/analyzer.hpp"
#include "sparsekit/util.hpp"

namespace sparsekit {

namespace {

constexpr double kLayerNormEpsilon = 1e-12;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) {
    constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2*pi)
    return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)) +
           x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

void check_shapes(const HeadParams& params, const TokenEmbeddingSequence& tokens) {
    if (params.vocab_size < 2 || params.dim < 1)
        throw std::invalid_argument("head requires vocab_size >= 2 and dim >= 1");
    if (params.embedding.size() != params.vocab_size * params.dim ||
        params.vocab_bias.size() != params.vocab_size ||
        params.proj.size() != params.dim * params.dim ||
        params.proj_bias.size() != params.dim || params.ln_gain.size() != params.dim ||
        params.ln_offset.size() != params.dim)
        throw std::invalid_argument("head parameter shapes are inconsistent");
    if (tokens.size() < 2)
        throw std::invalid_argument("token sequence must include the two sentinels");
    for (const auto& token : tokens)
        if (token.size() != params.dim)
            throw std::invalid_argument("token vector dimension mismatch");
}

// per-token intermediate values kept for the backward pass
struct TokenTrace {
    std::vector<double> pre_activation;  // u = proj*t + proj_bias
    std::vector<double> activated;       // gelu(u)
    std::vector<double> normalized;      // (activated - mean) * inv_std
    std::vector<double> hidden;          // ln_gain * normalized + ln_offset
    double inv_std = 0.0;
};

struct ForwardTrace {
    std::vector<TokenTrace> tokens;
    std::vector<double> max_pre;     // per vocab entry
    std::vector<std::uint32_t> argmax;
};

ForwardTrace run_forward(const HeadParams& params, const TokenEmbeddingSequence& tokens) {
    check_shapes(params, tokens);
    const std::size_t d = params.dim;
    ForwardTrace trace;
    trace.tokens.resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        TokenTrace& t = trace.tokens[i];
        t.pre_activation.assign(d, 0.0);
        for (std::size_t r = 0; r < d; ++r) {
            double sum = params.proj_bias[r];
            const double* row = params.proj.data() + r * d;
            for (std::size_t c = 0; c < d; ++c) sum += row[c] * tokens[i][c];
            t.pre_activation[r] = sum;
        }
        t.activated.resize(d);
        for (std::size_t r = 0; r < d; ++r) t.activated[r] = gelu(t.pre_activation[r]);
        double mean = 0.0;
        for (double v : t.activated) mean += v;
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (double v : t.activated) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d);
        t.inv_std = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        t.normalized.resize(d);
        t.hidden.resize(d);
        for (std::size_t r = 0; r < d; ++r) {
            t.normalized[r] = (t.activated[r] - mean) * t.inv_std;
            t.hidden[r] = params.ln_gain[r] * t.normalized[r] + params.ln_offset[r];
        }
    }
    trace.max_pre.assign(params.vocab_size, 0.0);
    trace.argmax.assign(params.vocab_size, 0);
    for (std::size_t v = 0; v < params.vocab_size; ++v) {
        const double* row = params.embedding_row(v);
        double best = 0.0;
        std::uint32_t best_token = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            double score = params.vocab_bias[v];
            for (std::size_t r = 0; r < params.dim; ++r)
                score += row[r] * trace.tokens[i].hidden[r];
            if (i == 0 || score > best) {  // ties keep the lowest token index
                best = score;
                best_token = static_cast<std::uint32_t>(i);
            }
        }
        trace.max_pre[v] = best;
        trace.argmax[v] = best_token;
    }
    return trace;
}

}  // namespace

HeadParams HeadParams::random_init(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
    if (vocab_size < 2 || dim < 1)
        throw std::invalid_argument("head requires vocab_size >= 2 and dim >= 1");
    HeadParams params;
    params.vocab_size = vocab_size;
    params.dim = dim;
    params.seed = seed;
    Rng rng(seed);
    auto fill = [&rng](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (auto& x : v) x = rng.uniform(-0.1, 0.1);
    };
    fill(params.embedding, vocab_size * dim);
    fill(params.vocab_bias, vocab_size);
    fill(params.proj, dim * dim);
    fill(params.proj_bias, dim);
    fill(params.ln_gain, dim);
    fill(params.ln_offset, dim);
    return params;
}

HeadGradients HeadGradients::zeros(const HeadParams& params, std::size_t n_tokens) {
    HeadGradients grads;
    grads.embedding.assign(params.embedding.size(), 0.0);
    grads.vocab_bias.assign(params.vocab_bias.size(), 0.0);
    grads.proj.assign(params.proj.size(), 0.0);
    grads.proj_bias.assign(params.proj_bias.size(), 0.0);
    grads.ln_gain.assign(params.ln_gain.size(), 0.0);
    grads.ln_offset.assign(params.ln_offset.size(), 0.0);
    grads.tokens.assign(n_tokens, std::vector<double>(params.dim, 0.0));
    return grads;
}

void HeadGradients::add_scaled(const HeadGradients& other, double scale) {
    auto axpy = [scale](std::vector<double>& dst, const std::vector<double>& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    };
    axpy(embedding, other.embedding);
    axpy(vocab_bias, other.vocab_bias);
    axpy(proj, other.proj);
    axpy(proj_bias, other.proj_bias);
    axpy(ln_gain, other.ln_gain);
    axpy(ln_offset, other.ln_offset);
}

std::vector<double> head_forward_dense(const HeadParams& params,
                                       const TokenEmbeddingSequence& tokens) {
    ForwardTrace trace = run_forward(params, tokens);
    std::vector<double> out(params.vocab_size, 0.0);
    for (std::size_t v = 0; v < params.vocab_size; ++v)
        if (trace.max_pre[v] > 0.0) out[v] = std::log1p(trace.max_pre[v]);
    return out;
}

SparseVector head_forward(const HeadParams& params, const TokenEmbeddingSequence& tokens) {
    std::vector<double> dense = head_forward_dense(params, tokens);
    std::vector<SparseVector::Entry> entries;
    for (std::uint32_t v = 0; v < dense.size(); ++v)
        if (dense[v] > 0.0) entries.push_back({v, dense[v]});
    return SparseVector::from_entries(std::move(entries));
}

HeadGradients head_backward(const HeadParams& params, const TokenEmbeddingSequence& tokens,
                            std::span<const double> upstream) {
    if (upstream.size() != params.vocab_size)
        throw std::invalid_argument("upstream gradient must have vocab_size entries");
    ForwardTrace trace = run_forward(params, tokens);
    const std::size_t d = params.dim;
    HeadGradients grads = HeadGradients::zeros(params, tokens.size());

    // d out / d max_pre flows only through the selected token, and only when
    // the clamped pre-activation is positive
    std::vector<std::vector<double>> hidden_grads(tokens.size(), std::vector<double>(d, 0.0));
    for (std::size_t v = 0; v < params.vocab_size; ++v) {
        if (trace.max_pre[v] <= 0.0 || upstream[v] == 0.0) continue;
        double g = upstream[v] / (1.0 + trace.max_pre[v]);
        std::uint32_t i = trace.argmax[v];
        grads.vocab_bias[v] += g;
        const double* row = params.embedding_row(v);
        double* erow = grads.embedding.data() + v * d;
        for (std::size_t r = 0; r < d; ++r) {
            erow[r] += g * trace.tokens[i].hidden[r];
            hidden_grads[i][r] += g * row[r];
        }
    }

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const TokenTrace& t = trace.tokens[i];
        const auto& dh = hidden_grads[i];
        // layer norm backward (biased variance)
        std::vector<double> dxhat(d);
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            grads.ln_gain[r] += dh[r] * t.normalized[r];
            grads.ln_offset[r] += dh[r];
            dxhat[r] = dh[r] * params.ln_gain[r];
            mean_dxhat += dxhat[r];
            mean_dxhat_xhat += dxhat[r] * t.normalized[r];
        }
        mean_dxhat /= static_cast<double>(d);
        mean_dxhat_xhat /= static_cast<double>(d);
        std::vector<double> du(d);
        for (std::size_t r = 0; r < d; ++r) {
            double dg = t.inv_std * (dxhat[r] - mean_dxhat - t.normalized[r] * mean_dxhat_xhat);
            du[r] = dg * gelu_derivative(t.pre_activation[r]);
        }
        for (std::size_t r = 0; r < d; ++r) {
            grads.proj_bias[r] += du[r];
            double* wrow = grads.proj.data() + r * d;
            for (std::size_t c = 0; c < d; ++c) wrow[c] += du[r] * tokens[i][c];
        }
        for (std::size_t c = 0; c < d; ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < d; ++r) sum += params.proj[r * d + c] * du[r];
            grads.tokens[i][c] = sum;
        }
    }
    return grads;
}

SpladeHead::SpladeHead(HeadParams params, std::vector<std::string> terms)
    : params_(std::move(params)), terms_(std::move(terms)) {
    if (terms_.size() != params_.vocab_size)
        throw std::invalid_argument("term list size must equal vocab_size");
    for (std::uint32_t i = 0; i < terms_.size(); ++i) {
        if (!row_index_.emplace(terms_[i], i).second)
            throw std::invalid_argument("duplicate term in head vocabulary: " + terms_[i]);
    }
    if (!row_index_.count(kClsToken) || !row_index_.count(kSepToken))
        throw std::invalid_argument("head vocabulary must contain the CLS/SEP sentinels");
}

SpladeHead SpladeHead::random_init(std::vector<std::string> terms, std::size_t dim,
                                   std::uint64_t seed) {
    std::vector<std::string> all;
    bool has_cls = false, has_sep = false;
    for (const auto& t : terms) {
        if (t == kClsToken) has_cls = true;
        if (t == kSepToken) has_sep = true;
    }
    if (!has_sep) all.push_back(kSepToken);
    if (!has_cls) all.insert(all.begin(), kClsToken);
    all.insert(all.end(), terms.begin(), terms.end());
    HeadParams params = HeadParams::random_init(all.size(), dim, seed);
    return SpladeHead(std::move(params), std::move(all));
}

SpladeHead SpladeHead::from_embeddings(const EmbeddingTable& table, std::uint64_t seed) {
    if (table.size() == 0) throw std::invalid_argument("empty embedding table");
    std::vector<std::string> terms;
    bool has_cls = false, has_sep = false;
    for (const auto& t : table.terms()) {
        if (t == kClsToken) has_cls = true;
        if (t == kSepToken) has_sep = true;
    }
    if (!has_cls) terms.push_back(kClsToken);
    if (!has_sep) terms.push_back(kSepToken);
    terms.insert(terms.end(), table.terms().begin(), table.terms().end());
    HeadParams params = HeadParams::random_init(terms.size(), table.dim(), seed);
    SpladeHead head(std::move(params), std::move(terms));
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto row = head.row_of(table.terms()[i]);
        std::memcpy(head.params_.embedding_row(static_cast<std::size_t>(row)),
                    table.row_at(i).data(), table.dim() * sizeof(double));
    }
    return head;
}

std::int64_t SpladeHead::row_of(const std::string& term) const {
    auto it = row_index_.find(term);
    return it == row_index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::vector<std::uint32_t> SpladeHead::token_rows(const std::vector<std::string>& tokens,
                                                  std::vector<std::string>* oov_warnings) const {
    std::vector<std::uint32_t> rows;
    rows.reserve(tokens.size() + 2);
    rows.push_back(static_cast<std::uint32_t>(row_of(kClsToken)));
    for (const auto& token : tokens) {
        auto row = row_of(token);
        if (row < 0) {
            if (oov_warnings) oov_warnings->push_back(token);
            continue;
        }
        rows.push_back(static_cast<std::uint32_t>(row));
    }
    rows.push_back(static_cast<std::uint32_t>(row_of(kSepToken)));
    return rows;
}

TokenEmbeddingSequence SpladeHead::gather(const std::vector<std::uint32_t>& rows) const {
    TokenEmbeddingSequence seq;
    seq.reserve(rows.size());
    for (auto row : rows) {
        const double* data = params_.embedding_row(row);
        seq.emplace_back(data, data + params_.dim);
    }
    return seq;
}

SparseVector SpladeHead::encode_rows(const std::vector<std::uint32_t>& rows) const {
    return head_forward(params_, gather(rows));
}

ExternalSparseVector SpladeHead::encode(const std::string& id,
                                        const std::vector<std::string>& tokens,
                                        std::vector<std::string>* oov_warnings) const {
    SparseVector vec = encode_rows(token_rows(tokens, oov_warnings));
    ExternalSparseVector out;
    out.id = id;
    for (const auto& entry : vec.entries()) out.weights[terms_[entry.term]] = entry.weight;
    return out;
}

std::vector<ExternalSparseVector> encode_corpus(const SpladeHead& head,
                                                const std::vector<Document>& docs,
                                                const AnalyzerConfig& analyzer,
                                                std::vector<std::string>* oov_warnings) {
    std::vector<ExternalSparseVector> vectors;
    vectors.reserve(docs.size());
    std::vector<std::string> oov;
    for (const auto& doc : docs) {
        AnalyzedText analyzed = analyze(doc.indexed_text(), analyzer);
        vectors.push_back(head.encode(doc.doc_id, analyzed.tokens, oov_warnings ? &oov : nullptr));
    }
    if (oov_warnings) {
        std::sort(oov.begin(), oov.end());
        oov.erase(std::unique(oov.begin(), oov.end()), oov.end());
        *oov_warnings = std::move(oov);
    }
    return vectors;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> terms,
                               std::vector<std::vector<double>> rows)
    : terms_(std::move(terms)), rows_(std::move(rows)) {
    if (terms_.size() != rows_.size())
        throw std::invalid_argument("embedding table terms/rows size mismatch");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!rows_[i].empty() && rows_[i].size() != rows_[0].size())
            throw std::invalid_argument("embedding table rows have mixed dimensions");
        for (double v : rows_[i])
            if (!std::isfinite(v))
                throw std::invalid_argument("non-finite embedding value for term " + terms_[i]);
        if (!index_.emplace(terms_[i], i).second)
            throw std::invalid_argument("duplicate term in embedding table: " + terms_[i]);
    }
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<std::string> terms;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::istringstream fields(lines[i]);
        std::string term;
        if (!(fields >> term))
            throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": empty line");
        std::vector<double> row;
        double value;
        while (fields >> value) row.push_back(value);
        // extraction must stop at end of line, not at a malformed token
        if (!fields.eof())
            throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                                     ": malformed embedding value");
        if (row.empty())
            throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                                     ": expected `term value1 ... valueD`");
        terms.push_back(std::move(term));
        rows.push_back(std::move(row));
    }
    return EmbeddingTable(std::move(terms), std::move(rows));
}

void EmbeddingTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        out << terms_[i];
        for (double v : rows_[i]) out << ' ' << format_double(v);
        out << '\n';
    }
}

const std::vector<double>* EmbeddingTable::row(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? nullptr : &rows_[it->second];
}

namespace {

constexpr std::uint32_t kHeadMagic = 0x534B4831;  // "SKH1"
constexpr std::uint32_t kHeadVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

std::uint32_t get_u32(std::istream& in) {
    char buf[4];
    in.read(buf, 4);
    if (!in) throw std::runtime_error("truncated head params file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw std::runtime_error("truncated head params file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

void put_block(std::ostream& out, const std::vector<double>& block) {
    for (double v : block) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put_u64(out, bits);
    }
}

void get_block(std::istream& in, std::vector<double>& block, std::size_t n) {
    block.resize(n);
    for (auto& v : block) {
        std::uint64_t bits = get_u64(in);
        std::memcpy(&v, &bits, sizeof(v));
    }
}

}  // namespace

void save_head_params(const std::string& path, const HeadParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    put_u32(out, kHeadMagic);
    put_u32(out, kHeadVersion);
    put_u64(out, params.vocab_size);
    put_u64(out, params.dim);
    put_u64(out, params.seed);
    put_block(out, params.embedding);
    put_block(out, params.vocab_bias);
    put_block(out, params.proj);
    put_block(out, params.proj_bias);
    put_block(out, params.ln_gain);
    put_block(out, params.ln_offset);
    if (!out) throw std::runtime_error("write failed: " + path);
}

HeadParams load_head_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    if (get_u32(in) != kHeadMagic) throw std::runtime_error("bad magic in head params file");
    if (get_u32(in) != kHeadVersion)
        throw std::runtime_error("unsupported head params version");
    HeadParams params;
    params.vocab_size = get_u64(in);
    params.dim = get_u64(in);
    params.seed = get_u64(in);
    get_block(in, params.embedding, params.vocab_size * params.dim);
    get_block(in, params.vocab_bias, params.vocab_size);
    get_block(in, params.proj, params.dim * params.dim);
    get_block(in, params.proj_bias, params.dim);
    get_block(in, params.ln_gain, params.dim);
    get_block(in, params.ln_offset, params.dim);
    for (const auto* block : {&params.embedding, &params.vocab_bias, &params.proj,
                              &params.proj_bias, &params.ln_gain, &params.ln_offset})
        for (double v : *block)
            if (!std::isfinite(v))
                throw std::runtime_error("non-finite parameter in head params file: " + path);
    return params;
}

}  // namespace sparsekit
