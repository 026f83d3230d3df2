#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "sparsekit/head.hpp"
#include "support/oracles.hpp"

using namespace sparsekit;

namespace {

// straight-line scalar re-implementation of the encoding math, kept
// independent of the library's vectorized path
std::vector<double> scalar_forward(const HeadParams& p, const TokenEmbeddingSequence& tokens) {
    const std::size_t d = p.dim;
    std::vector<std::vector<double>> hidden;
    for (const auto& token : tokens) {
        std::vector<double> u(d, 0.0);
        for (std::size_t r = 0; r < d; ++r) {
            u[r] = p.proj_bias[r];
            for (std::size_t c = 0; c < d; ++c) u[r] += p.proj[r * d + c] * token[c];
        }
        std::vector<double> g(d);
        for (std::size_t r = 0; r < d; ++r)
            g[r] = 0.5 * u[r] * (1.0 + std::erf(u[r] / std::numbers::sqrt2));
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (double v : g) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d);
        double inv = 1.0 / std::sqrt(var + 1e-12);
        std::vector<double> h(d);
        for (std::size_t r = 0; r < d; ++r)
            h[r] = p.ln_gain[r] * ((g[r] - mean) * inv) + p.ln_offset[r];
        hidden.push_back(std::move(h));
    }
    std::vector<double> out(p.vocab_size, 0.0);
    for (std::size_t v = 0; v < p.vocab_size; ++v) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& h : hidden) {
            double s = p.vocab_bias[v];
            for (std::size_t r = 0; r < d; ++r) s += p.embedding[v * d + r] * h[r];
            best = std::max(best, s);
        }
        out[v] = best > 0.0 ? std::log(1.0 + best) : 0.0;
    }
    return out;
}

TokenEmbeddingSequence random_tokens(Rng& rng, std::size_t n, std::size_t dim) {
    TokenEmbeddingSequence tokens(n, std::vector<double>(dim));
    for (auto& token : tokens)
        for (auto& v : token) v = rng.uniform(-0.5, 0.5);
    return tokens;
}

}  // namespace

TEST_CASE("forward clamps to zero when every pre-activation is negative") {
    auto params = HeadParams::random_init(4, 3, 1);
    for (auto& c : params.vocab_bias) c = -100.0;  // drives all scores far below zero
    Rng rng(2);
    auto tokens = random_tokens(rng, 3, 3);
    auto sparse = head_forward(params, tokens);
    CHECK(sparse.nnz() == 0);
}

TEST_CASE("forward produces exactly one at a pre-activation of e - 1") {
    // single vocab row scoring e-1: weight log(1 + (e-1)) = 1
    HeadParams params;
    params.vocab_size = 2;
    params.dim = 1;
    params.embedding = {0.0, 0.0};   // rows contribute nothing
    params.vocab_bias = {std::numbers::e - 1.0, -1.0};
    params.proj = {1.0};
    params.proj_bias = {0.0};
    params.ln_gain = {1.0};
    params.ln_offset = {0.0};
    TokenEmbeddingSequence tokens = {{0.3}, {0.1}};
    auto out = head_forward_dense(params, tokens);
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out[1] == 0.0);
}

TEST_CASE("forward matches the scalar re-implementation on random instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto params = HeadParams::random_init(5, 3, seed);
        Rng rng(seed + 1000);
        auto tokens = random_tokens(rng, 4, 3);  // CLS + 2 + SEP
        auto expected = scalar_forward(params, tokens);
        auto actual = head_forward_dense(params, tokens);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t v = 0; v < actual.size(); ++v)
            CHECK(actual[v] == doctest::Approx(expected[v]).epsilon(1e-12));
    }
}

TEST_CASE("forward output is non-negative and order-invariant in the tokens") {
    Rng rng(7);
    auto params = HeadParams::random_init(8, 4, 7);
    auto tokens = random_tokens(rng, 5, 4);
    auto base = head_forward_dense(params, tokens);
    for (double v : base) CHECK(v >= 0.0);

    auto shuffled = tokens;
    std::reverse(shuffled.begin(), shuffled.end());
    auto out = head_forward_dense(params, shuffled);
    for (std::size_t v = 0; v < base.size(); ++v) CHECK(out[v] == base[v]);
}

TEST_CASE("raising a vocab bias never lowers that entry's weight") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto params = HeadParams::random_init(6, 3, static_cast<std::uint64_t>(trial));
        auto tokens = random_tokens(rng, 3, 3);
        auto before = head_forward_dense(params, tokens);
        std::size_t v = rng.index(6);
        params.vocab_bias[v] += rng.uniform(0.01, 1.0);  // lifts every pre-activation of entry v
        auto after = head_forward_dense(params, tokens);
        CHECK(after[v] >= before[v]);
    }
}

TEST_CASE("max-pool ties send the subgradient to the lowest token index") {
    auto params = HeadParams::random_init(6, 3, 8);
    Rng rng(9);
    std::vector<double> shared(3);
    for (auto& v : shared) v = rng.uniform(-0.5, 0.5);
    // identical token vectors tie on every vocabulary entry
    TokenEmbeddingSequence tokens = {shared, shared, shared};
    std::vector<double> upstream(6, 1.0);
    auto grads = head_backward(params, tokens, upstream);
    bool first_has_signal = false;
    for (double g : grads.tokens[0])
        if (g != 0.0) first_has_signal = true;
    CHECK(first_has_signal);
    for (std::size_t t = 1; t < tokens.size(); ++t)
        for (double g : grads.tokens[t]) CHECK(g == 0.0);
}

TEST_CASE("zero upstream gradient yields all-zero gradients") {
    auto params = HeadParams::random_init(5, 3, 3);
    Rng rng(4);
    auto tokens = random_tokens(rng, 3, 3);
    std::vector<double> upstream(5, 0.0);
    auto grads = head_backward(params, tokens, upstream);
    for (double g : oracle::grad_slots(grads)) CHECK(g == 0.0);
    for (const auto& token_grad : grads.tokens)
        for (double g : token_grad) CHECK(g == 0.0);
}

TEST_CASE("token excluded from every max gets a zero embedding-input gradient") {
    auto params = HeadParams::random_init(5, 3, 11);
    Rng rng(12);
    auto tokens = random_tokens(rng, 3, 3);
    // make token 2 uncompetitive: heavily negative hidden response
    for (auto& v : tokens[2]) v = -50.0;
    std::vector<double> upstream(5, 1.0);
    auto grads = head_backward(params, tokens, upstream);
    // verify the claim that token 2 never wins a max first
    auto dense = head_forward_dense(params, tokens);
    TokenEmbeddingSequence without = {tokens[0], tokens[1]};
    auto dense_without = head_forward_dense(params, without);
    bool ever_wins = false;
    for (std::size_t v = 0; v < dense.size(); ++v)
        if (dense[v] != dense_without[v]) ever_wins = true;
    REQUIRE_FALSE(ever_wins);
    for (double g : grads.tokens[2]) CHECK(g == 0.0);
}

TEST_CASE("head_backward matches central finite differences on 100 random instances") {
    const double h = 1e-5;
    const double tolerance = 1e-4;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::size_t vocab = 4 + seed % 4;
        std::size_t dim = 2 + seed % 3;
        auto params = HeadParams::random_init(vocab, dim, seed);
        Rng rng(seed * 7 + 1);
        auto tokens = random_tokens(rng, 2 + rng.index(3), dim);
        std::vector<double> upstream(vocab);
        for (auto& u : upstream) u = rng.uniform(-1.0, 1.0);

        auto eval = [&]() {
            auto out = head_forward_dense(params, tokens);
            double loss = 0.0;
            for (std::size_t v = 0; v < vocab; ++v) loss += upstream[v] * out[v];
            return loss;
        };
        auto grads = head_backward(params, tokens, upstream);
        auto analytic = oracle::grad_slots(grads);
        auto slots = oracle::param_slots(params);
        REQUIRE(analytic.size() == slots.size());
        for (std::size_t i = 0; i < slots.size(); ++i) {
            double numeric = oracle::finite_difference(eval, *slots[i], h);
            worst = std::max(worst, oracle::gradcheck_error(analytic[i], numeric));
        }
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            for (std::size_t c = 0; c < dim; ++c) {
                double numeric = oracle::finite_difference(eval, tokens[t][c], h);
                worst = std::max(worst, oracle::gradcheck_error(grads.tokens[t][c], numeric));
            }
        }
    }
    CHECK(worst < tolerance);
    MESSAGE("max gradcheck relative error: " << worst);
}

TEST_CASE("encode is deterministic and respects the OOV policy") {
    SpladeHead head = SpladeHead::random_init({"alpha", "beta", "gamma"}, 3, 5);
    CHECK(head.vocab_size() == 5);  // sentinels prepended

    std::vector<std::string> oov;
    auto a = head.encode("doc", {"alpha", "unknown", "beta"}, &oov);
    auto b = head.encode("doc", {"alpha", "unknown", "beta"});
    REQUIRE(oov.size() == 1);
    CHECK(oov[0] == "unknown");
    CHECK(a.weights == b.weights);

    SUBCASE("empty token list still encodes via the sentinels") {
        auto empty = head.encode("empty", {});
        // output may or may not be empty, but encoding must succeed and be
        // reproducible
        auto again = head.encode("empty", {});
        CHECK(empty.weights == again.weights);
    }
}

TEST_CASE("encode_corpus vectors reproduce direct forward scores") {
    Rng rng(31);
    auto pool = oracle::word_pool(12);
    auto docs = oracle::random_corpus(rng, 10, pool, 2, 6);
    AnalyzerConfig plain = AnalyzerConfig::plain();
    SpladeHead head = SpladeHead::random_init(pool, 4, 17);

    auto vectors = encode_corpus(head, docs, plain);
    REQUIRE(vectors.size() == docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto tokens = analyze(docs[i].text, plain).tokens;
        auto direct = head.encode_rows(head.token_rows(tokens));
        // identical docs must produce identical vectors; every weight matches
        // the direct forward pass
        std::map<std::string, double> expected;
        for (const auto& entry : direct.entries())
            expected[head.terms()[entry.term]] = entry.weight;
        CHECK(vectors[i].weights == expected);
    }
    // scoring through the interchange form equals scoring the direct outputs
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (std::size_t j = 0; j < docs.size(); ++j) {
            double via_maps = oracle::map_dot(vectors[i].weights, vectors[j].weights);
            auto vi = head.encode_rows(head.token_rows(analyze(docs[i].text, plain).tokens));
            auto vj = head.encode_rows(head.token_rows(analyze(docs[j].text, plain).tokens));
            CHECK(via_maps == doctest::Approx(dot(vi, vj)).epsilon(1e-12));
        }
}

TEST_CASE("head params serialize to a single binary file") {
    auto params = HeadParams::random_init(6, 4, 99);
    auto path = (std::filesystem::temp_directory_path() / "sk_head_params.bin").string();
    save_head_params(path, params);
    auto loaded = load_head_params(path);
    CHECK(loaded.vocab_size == params.vocab_size);
    CHECK(loaded.dim == params.dim);
    CHECK(loaded.seed == params.seed);
    CHECK(loaded.embedding == params.embedding);
    CHECK(loaded.vocab_bias == params.vocab_bias);
    CHECK(loaded.proj == params.proj);
    CHECK(loaded.proj_bias == params.proj_bias);
    CHECK(loaded.ln_gain == params.ln_gain);
    CHECK(loaded.ln_offset == params.ln_offset);
    std::filesystem::remove(path);
}

TEST_CASE("embedding tables reject malformed and non-finite values") {
    auto path = (std::filesystem::temp_directory_path() / "sk_emb_inf.txt").string();
    {
        std::ofstream out(path);
        out << "alpha 0.1 inf\n";  // streams stop at "inf"; must not truncate silently
    }
    CHECK_THROWS_WITH_AS(EmbeddingTable::load(path), doctest::Contains("malformed"),
                         std::runtime_error);
    std::filesystem::remove(path);

    std::vector<double> bad_row = {0.1, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_WITH_AS(EmbeddingTable({"alpha"}, {bad_row}), doctest::Contains("non-finite"),
                         std::invalid_argument);
}

TEST_CASE("dimension mismatches are rejected") {
    auto params = HeadParams::random_init(4, 3, 0);
    TokenEmbeddingSequence bad = {{0.1, 0.2}, {0.3, 0.4}};  // dim 2, head wants 3
    CHECK_THROWS_AS(head_forward(params, bad), std::invalid_argument);
    TokenEmbeddingSequence single = {{0.1, 0.2, 0.3}};  // sentinels missing
    CHECK_THROWS_AS(head_forward(params, single), std::invalid_argument);
}
