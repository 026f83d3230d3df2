#include "doctest.h"

#include <cmath>

#include "sparsekit/sparse.hpp"
#include "support/oracles.hpp"

using namespace sparsekit;

namespace {

SparseVector vec(std::initializer_list<std::pair<std::uint32_t, double>> entries) {
    std::vector<SparseVector::Entry> list;
    for (const auto& [term, weight] : entries) list.push_back({term, weight});
    return SparseVector::from_entries(std::move(list));
}

}  // namespace

TEST_CASE("SparseVector enforces its invariants") {
    auto v = vec({{3, 1.0}, {1, 2.0}, {2, 0.0}});
    REQUIRE(v.nnz() == 2);  // zero entry pruned
    CHECK(v.entries()[0].term == 1);
    CHECK(v.entries()[1].term == 3);
    CHECK(v.weight_of(2) == 0.0);
    CHECK_THROWS_AS(vec({{1, -0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(vec({{1, 1.0}, {1, 2.0}}), std::invalid_argument);
}

TEST_CASE("dot product") {
    SUBCASE("disjoint supports give zero") {
        CHECK(dot(vec({{1, 2.0}}), vec({{2, 3.0}})) == 0.0);
    }
    SUBCASE("hand-computed overlap") {
        // q={a:1,b:2}, d={b:3,c:5} -> 2*3 = 6
        CHECK(dot(vec({{0, 1.0}, {1, 2.0}}), vec({{1, 3.0}, {2, 5.0}})) == 6.0);
    }
    SUBCASE("commutative and non-negative on self") {
        Rng rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<SparseVector::Entry> ea, eb;
            for (std::uint32_t t = 0; t < 20; ++t) {
                if (rng.unit() < 0.4) ea.push_back({t, rng.uniform(0.0, 2.0)});
                if (rng.unit() < 0.4) eb.push_back({t, rng.uniform(0.0, 2.0)});
            }
            auto a = SparseVector::from_entries(ea);
            auto b = SparseVector::from_entries(eb);
            CHECK(dot(a, b) == dot(b, a));
            CHECK(dot(a, a) >= 0.0);
        }
    }
}

TEST_CASE("apply_idf") {
    SUBCASE("all-ones weights are the identity") {
        auto d = vec({{0, 1.5}, {4, 0.25}});
        IdfVector ones(std::vector<double>(8, 1.0), 1.0);
        auto weighted = apply_idf(d, ones);
        REQUIRE(weighted.nnz() == d.nnz());
        for (std::size_t i = 0; i < d.nnz(); ++i) {
            CHECK(weighted.entries()[i].term == d.entries()[i].term);
            CHECK(weighted.entries()[i].weight == d.entries()[i].weight);
        }
    }
    SUBCASE("hand value: 2.0 * ln 4") {
        IdfVector idf(std::vector<double>{std::log(4.0)}, 1.0);
        auto weighted = apply_idf(vec({{0, 2.0}}), idf);
        REQUIRE(weighted.nnz() == 1);
        CHECK(weighted.entries()[0].weight == doctest::Approx(2.7726).epsilon(1e-4));
    }
    SUBCASE("zero weight prunes the entry") {
        IdfVector idf(std::vector<double>{0.0, 1.0}, 1.0);
        auto weighted = apply_idf(vec({{0, 2.0}, {1, 1.0}}), idf);
        REQUIRE(weighted.nnz() == 1);
        CHECK(weighted.entries()[0].term == 1);
    }
    SUBCASE("unknown terms keep their weight via the default") {
        IdfVector idf(std::vector<double>{}, 1.0);
        auto weighted = apply_idf(vec({{7, 0.5}}), idf);
        CHECK(weighted.weight_of(7) == 0.5);
    }
    SUBCASE("nnz never grows") {
        Rng rng(3);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<SparseVector::Entry> entries;
            std::vector<double> weights(32);
            for (auto& w : weights) w = rng.unit() < 0.2 ? 0.0 : rng.uniform(0.0, 2.0);
            for (std::uint32_t t = 0; t < 32; ++t)
                if (rng.unit() < 0.5) entries.push_back({t, rng.uniform(0.01, 3.0)});
            auto d = SparseVector::from_entries(entries);
            CHECK(apply_idf(d, IdfVector(weights, 1.0)).nnz() <= d.nnz());
        }
    }
    SUBCASE("weighting then dotting equals the three-way product sum") {
        Rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<SparseVector::Entry> qe, de;
            std::vector<double> weights(24);
            for (auto& w : weights) w = rng.uniform(0.0, 3.0);
            for (std::uint32_t t = 0; t < 24; ++t) {
                if (rng.unit() < 0.5) qe.push_back({t, rng.uniform(0.01, 2.0)});
                if (rng.unit() < 0.5) de.push_back({t, rng.uniform(0.01, 2.0)});
            }
            auto q = SparseVector::from_entries(qe);
            auto d = SparseVector::from_entries(de);
            IdfVector idf(weights, 1.0);
            double lhs = dot(q, apply_idf(d, idf));
            double rhs = 0.0;
            for (const auto& entry : q.entries())
                rhs += entry.weight * idf.weight(entry.term) * d.weight_of(entry.term);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("score_splade_doc sums over the query token multiset") {
    TermDictionary dict;
    auto cancer = dict.add("cancer");
    auto d = vec({{cancer, 1.5}});
    SUBCASE("single occurrence") {
        AnalyzedText q{{"cancer"}, 1};
        CHECK(score_splade_doc(q, dict, d) == 1.5);
    }
    SUBCASE("repeated token counts twice") {
        AnalyzedText q{{"cancer", "cancer"}, 2};
        CHECK(score_splade_doc(q, dict, d) == 3.0);
    }
    SUBCASE("absent tokens contribute zero") {
        AnalyzedText q{{"benign", "tissue"}, 2};
        CHECK(score_splade_doc(q, dict, d) == 0.0);
    }
}

TEST_CASE("score_hybrid is plain addition") {
    CHECK(score_hybrid(0.0, 1.25) == 1.25);
    CHECK(score_hybrid(2.5, 1.5) == 4.0);
}

TEST_CASE("impact index construction") {
    auto dict = std::make_shared<TermDictionary>();
    std::vector<ExternalSparseVector> vectors = {
        {"d1", {{"alpha", 1.0}, {"beta", 2.0}}},
        {"d2", {{"beta", 0.5}}},
    };
    SUBCASE("standalone build") {
        auto index = ImpactIndex::build(vectors, dict);
        CHECK(index.doc_count() == 2);
        auto beta = dict->find("beta");
        REQUIRE(beta);
        CHECK(index.postings(*beta).size() == 2);
        CHECK_FALSE(index.stored_idf().has_value());
    }
    SUBCASE("corpus-registered build rejects unknown ids") {
        DocTable docs;
        docs.add("d1");
        CHECK_THROWS_WITH_AS(ImpactIndex::build(vectors, dict, &docs),
                             doctest::Contains("unknown document id \"d2\""), std::runtime_error);
    }
    SUBCASE("idf baked at build time") {
        IdfVector idf(std::vector<double>{}, 2.0);  // every term doubled
        auto index = ImpactIndex::build(vectors, dict, nullptr, &idf);
        REQUIRE(index.stored_idf().has_value());
        auto beta = dict->find("beta");
        auto d1 = index.docs().find("d1");
        REQUIRE(beta);
        REQUIRE(d1);
        CHECK(index.doc_vector(*d1).weight_of(*beta) == 4.0);
    }
    SUBCASE("duplicate vector id is rejected") {
        std::vector<ExternalSparseVector> dupes = {{"d1", {}}, {"d1", {}}};
        CHECK_THROWS(ImpactIndex::build(dupes, dict));
    }
}

TEST_CASE("searcher equals brute force on a random corpus in every mode") {
    Rng rng(123);
    auto pool = oracle::word_pool(60);
    const std::size_t n_docs = 200;
    auto docs = oracle::random_corpus(rng, n_docs, pool, 4, 16);
    AnalyzerConfig plain = AnalyzerConfig::plain();
    Bm25Params params;

    std::vector<std::string> ids;
    for (const auto& doc : docs) ids.push_back(doc.doc_id);
    auto doc_vectors = oracle::random_vectors(rng, ids, pool, 12);

    auto dict = std::make_shared<TermDictionary>();
    auto lexical = InvertedIndex::build(docs, plain, dict);
    auto idf = idf_vector(lexical);
    auto impact = ImpactIndex::build(doc_vectors, dict, &lexical.docs(), &idf);
    Searcher searcher(&lexical, &impact, params);

    // reference: analyzed tokens and reweighted map-form vectors
    std::vector<std::pair<std::string, std::vector<std::string>>> analyzed;
    for (const auto& doc : docs) analyzed.push_back({doc.doc_id, analyze(doc.text, plain).tokens});
    oracle::BruteForceBm25 bm25_ref(analyzed, params.k1, params.b, params.log_base);

    std::vector<std::map<std::string, double>> weighted_docs(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        for (const auto& [term, weight] : doc_vectors[i].weights) {
            if (weight == 0.0) continue;
            auto id = dict->find(term);
            double w = weight * (id ? idf.weight(*id) : 1.0);
            if (w > 0.0) weighted_docs[i][term] = w;
        }
    }

    auto queries = oracle::random_queries(rng, 10, pool, 1, 5);
    auto query_vectors = oracle::random_vectors(
        rng, {"q0", "q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8", "q9"}, pool, 8);

    const std::size_t k = 15;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto tokens = analyze(queries[qi].text, plain).tokens;
        Searcher::QueryInput input;
        input.tokens = {tokens, tokens.size()};
        input.vec = to_sparse_vector(query_vectors[qi], *dict);

        for (auto mode : {SearchMode::Bm25, SearchMode::Splade, SearchMode::SpladeDoc,
                          SearchMode::HybridSplade, SearchMode::HybridSpladeDoc}) {
            std::vector<oracle::ScoredDoc> scored;
            for (std::size_t di = 0; di < n_docs; ++di) {
                bool bm25_match = bm25_ref.matches(tokens, di);
                double bm25 = bm25_match ? bm25_ref.score(tokens, di) : 0.0;
                double splade = oracle::map_dot(query_vectors[qi].weights, weighted_docs[di]);
                double splade_doc = oracle::bow_score(tokens, weighted_docs[di]);
                bool splade_match = splade > 0.0;
                bool splade_doc_match = splade_doc > 0.0;
                double score = 0.0;
                bool match = false;
                switch (mode) {
                    case SearchMode::Bm25: score = bm25; match = bm25_match; break;
                    case SearchMode::Splade: score = splade; match = splade_match; break;
                    case SearchMode::SpladeDoc: score = splade_doc; match = splade_doc_match; break;
                    case SearchMode::HybridSplade:
                        score = bm25 + splade;
                        match = bm25_match || splade_match;
                        break;
                    case SearchMode::HybridSpladeDoc:
                        score = bm25 + splade_doc;
                        match = bm25_match || splade_doc_match;
                        break;
                }
                if (match) scored.push_back({docs[di].doc_id, score});
            }
            auto expected = oracle::top_k(std::move(scored), k);
            auto actual = searcher.search(input, mode, k);
            REQUIRE(actual.size() == expected.size());
            for (std::size_t i = 0; i < actual.size(); ++i) {
                CAPTURE(search_mode_name(mode));
                CHECK(actual[i].doc_id == expected[i].doc_id);
                CHECK(actual[i].score == doctest::Approx(expected[i].score).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("search edge cases") {
    auto dict = std::make_shared<TermDictionary>();
    std::vector<Document> docs = {{"d1", "", "alpha beta"}, {"d2", "", "beta gamma"}};
    auto lexical = InvertedIndex::build(docs, AnalyzerConfig::plain(), dict);
    std::vector<ExternalSparseVector> vectors = {{"d1", {{"alpha", 1.0}}}, {"d2", {}}};
    auto impact = ImpactIndex::build(vectors, dict, &lexical.docs());
    Searcher searcher(&lexical, &impact, {});

    SUBCASE("k larger than the corpus returns all matching docs") {
        Searcher::QueryInput input;
        input.tokens = {{"beta"}, 1};
        auto hits = searcher.search(input, SearchMode::Bm25, 100);
        CHECK(hits.size() == 2);
    }
    SUBCASE("hybrid with empty sparse vectors equals the bm25 ranking") {
        std::vector<ExternalSparseVector> zero_vectors = {{"d1", {}}, {"d2", {}}};
        auto zero_impact = ImpactIndex::build(zero_vectors, dict, &lexical.docs());
        Searcher hybrid(&lexical, &zero_impact, {});
        Searcher::QueryInput input;
        input.tokens = {{"alpha", "beta"}, 2};
        input.vec = SparseVector{};
        auto hybrid_hits = hybrid.search(input, SearchMode::HybridSplade, 10);
        auto bm25_hits = hybrid.search(input, SearchMode::Bm25, 10);
        REQUIRE(hybrid_hits.size() == bm25_hits.size());
        for (std::size_t i = 0; i < hybrid_hits.size(); ++i) {
            CHECK(hybrid_hits[i].doc_id == bm25_hits[i].doc_id);
            CHECK(hybrid_hits[i].score == bm25_hits[i].score);
        }
    }
    SUBCASE("hybrid without both indexes is an error") {
        Searcher impact_only(nullptr, &impact, {});
        Searcher::QueryInput input;
        input.tokens = {{"alpha"}, 1};
        input.vec = SparseVector{};
        CHECK_THROWS_WITH_AS(impact_only.search(input, SearchMode::HybridSplade, 5),
                             doctest::Contains("requires a lexical index"), std::runtime_error);
    }
    SUBCASE("mismatched doc sets are rejected at construction") {
        std::vector<ExternalSparseVector> other = {{"x1", {{"alpha", 1.0}}}};
        auto other_impact = ImpactIndex::build(other, dict);
        CHECK_THROWS_WITH_AS(Searcher(&lexical, &other_impact, {}),
                             doctest::Contains("different document sets"), std::runtime_error);
    }
    SUBCASE("splade mode requires the query vector") {
        Searcher::QueryInput input;
        input.tokens = {{"alpha"}, 1};
        CHECK_THROWS_WITH_AS(searcher.search(input, SearchMode::Splade, 5),
                             doctest::Contains("query sparse vector"), std::runtime_error);
    }
}

TEST_CASE("search hit scores equal the per-pair scoring ops bitwise") {
    Rng rng(314);
    auto pool = oracle::word_pool(20);
    auto docs = oracle::random_corpus(rng, 40, pool, 3, 9);
    AnalyzerConfig plain = AnalyzerConfig::plain();
    std::vector<std::string> ids;
    for (const auto& doc : docs) ids.push_back(doc.doc_id);
    auto vectors = oracle::random_vectors(rng, ids, pool, 6);

    auto dict = std::make_shared<TermDictionary>();
    auto lexical = InvertedIndex::build(docs, plain, dict);
    auto impact = ImpactIndex::build(vectors, dict, &lexical.docs());
    Searcher searcher(&lexical, &impact, {});

    std::map<std::string, std::uint32_t> internal;
    for (const auto& id : ids) internal[id] = *impact.docs().find(id);

    Searcher::QueryInput input;
    auto tokens = analyze(docs[0].text, plain).tokens;
    input.tokens = {tokens, tokens.size()};
    input.vec = to_sparse_vector(vectors[3], *dict);

    for (auto hit : searcher.search(input, SearchMode::Bm25, 40))
        CHECK(hit.score == bm25_score(lexical, input.tokens, hit.doc_id));
    for (auto hit : searcher.search(input, SearchMode::Splade, 40))
        CHECK(hit.score == score_splade(*input.vec, impact.doc_vector(internal[hit.doc_id])));
    for (auto hit : searcher.search(input, SearchMode::SpladeDoc, 40))
        CHECK(hit.score ==
              score_splade_doc(input.tokens, *dict, impact.doc_vector(internal[hit.doc_id])));
    for (auto hit : searcher.search(input, SearchMode::HybridSplade, 40)) {
        double bm25 = bm25_score(lexical, input.tokens, hit.doc_id);  // 0 for non-matches
        double sparse = score_splade(*input.vec, impact.doc_vector(internal[hit.doc_id]));
        CHECK(hit.score == score_hybrid(bm25, sparse));
    }
}

TEST_CASE("hybrid search aligns indexes whose internal doc orders differ") {
    auto dict = std::make_shared<TermDictionary>();
    std::vector<Document> docs = {{"d1", "", "alpha beta"}, {"d2", "", "beta gamma"}};
    auto lexical = InvertedIndex::build(docs, AnalyzerConfig::plain(), dict);
    // standalone impact build in reversed order: internal ids flip
    std::vector<ExternalSparseVector> vectors = {{"d2", {{"gamma", 2.0}}},
                                                 {"d1", {{"alpha", 1.0}}}};
    auto impact = ImpactIndex::build(vectors, dict);
    REQUIRE(impact.docs().id(0) == "d2");
    Searcher searcher(&lexical, &impact, {});

    Searcher::QueryInput input;
    input.tokens = {{"gamma"}, 1};
    std::vector<SparseVector::Entry> entries = {{*dict->find("gamma"), 1.0}};
    input.vec = SparseVector::from_entries(entries);
    auto hits = searcher.search(input, SearchMode::HybridSplade, 10);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].doc_id == "d2");
    double bm25_part = bm25_score(lexical, input.tokens, "d2");
    CHECK(hits[0].score == doctest::Approx(bm25_part + 2.0).epsilon(1e-12));
}

TEST_CASE("search mode names round-trip") {
    for (auto mode : {SearchMode::Bm25, SearchMode::Splade, SearchMode::SpladeDoc,
                      SearchMode::HybridSplade, SearchMode::HybridSpladeDoc}) {
        auto parsed = parse_search_mode(search_mode_name(mode));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == mode);
    }
    CHECK_FALSE(parse_search_mode("dense").has_value());
}
