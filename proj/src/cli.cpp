#include "sparsekit/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sparsekit/corpus.hpp"
#include "sparsekit/diagnostics.hpp"
#include "sparsekit/head.hpp"
#include "sparsekit/index_io.hpp"
#include "sparsekit/sparse.hpp"
#include "sparsekit/training.hpp"
#include "sparsekit/trec.hpp"
#include "sparsekit/util.hpp"
#include "sparsekit/vocab.hpp"

namespace sparsekit {

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

bool flag_on(const std::string& value) { return value == "on"; }

std::string now_timestamp() {
    auto now = std::chrono::system_clock::now();
    auto time = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&time));
    return buf;
}

struct IndexArgs {
    std::string corpus;
    std::string out_dir;
    std::string sparse_vectors;
    std::string idf_weighting = "on";
    std::string stemming = "on";
    double log_base = std::numbers::e;
};

int cmd_index(const IndexArgs& args, std::ostream&, std::ostream& err) {
    err << "# config: command=index corpus=" << args.corpus << " out=" << args.out_dir
        << " sparse_vectors=" << (args.sparse_vectors.empty() ? "-" : args.sparse_vectors)
        << " idf_weighting=" << args.idf_weighting << " stemming=" << args.stemming
        << " log_base=" << format_double(args.log_base) << '\n';

    auto docs = load_corpus(args.corpus);
    IndexBundle bundle;
    bundle.meta.stemming = flag_on(args.stemming);
    bundle.meta.log_base = args.log_base;
    bundle.meta.idf_weighting = flag_on(args.idf_weighting);
    bundle.dict = std::make_shared<TermDictionary>();
    bundle.lexical = InvertedIndex::build(docs, bundle.meta.analyzer(), bundle.dict);
    if (!args.sparse_vectors.empty()) {
        auto vectors = load_sparse_vectors(args.sparse_vectors);
        std::optional<IdfVector> idf;
        if (bundle.meta.idf_weighting) idf = idf_vector(*bundle.lexical, args.log_base);
        bundle.impact = ImpactIndex::build(vectors, bundle.dict, &bundle.lexical->docs(),
                                           idf ? &*idf : nullptr);
    }
    save_index_dir(args.out_dir, bundle);
    err << "indexed " << docs.size() << " documents into " << args.out_dir << '\n';
    return kExitOk;
}

struct SearchArgs {
    std::string index_dir;
    std::string queries;
    std::string mode;
    std::string query_vectors;
    std::string run_tag;
    std::size_t k = 1000;
    double k1 = 0.9;
    double b = 0.4;
    double log_base = std::numbers::e;
};

int cmd_search(const SearchArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=search index=" << args.index_dir << " queries=" << args.queries
        << " mode=" << args.mode << " k=" << args.k << " k1=" << format_double(args.k1)
        << " b=" << format_double(args.b) << " log_base=" << format_double(args.log_base)
        << '\n';

    auto mode = parse_search_mode(args.mode);
    if (!mode) throw std::runtime_error("unknown search mode: " + args.mode);
    IndexBundle bundle = load_index_dir(args.index_dir);
    auto queries = load_queries(args.queries);
    AnalyzerConfig analyzer = bundle.meta.analyzer();
    Bm25Params params{args.k1, args.b, args.log_base};

    std::map<std::string, ExternalSparseVector> query_vectors;
    const bool needs_vectors =
        *mode == SearchMode::Splade || *mode == SearchMode::HybridSplade;
    if (needs_vectors) {
        if (args.query_vectors.empty())
            throw std::runtime_error("mode " + args.mode + " requires --query-vectors");
        for (auto& vec : load_sparse_vectors(args.query_vectors))
            query_vectors[vec.id] = std::move(vec);
    }

    Searcher searcher(bundle.lexical ? &*bundle.lexical : nullptr,
                      bundle.impact ? &*bundle.impact : nullptr, params);
    const std::string tag = args.run_tag.empty() ? args.mode : args.run_tag;

    std::vector<std::vector<SearchHit>> results(queries.size());
    std::vector<std::string> errors(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) {
        try {
            Searcher::QueryInput input;
            input.tokens = analyze(queries[i].text, analyzer);
            if (needs_vectors) {
                auto it = query_vectors.find(queries[i].query_id);
                if (it == query_vectors.end())
                    throw std::runtime_error("no sparse vector for query id \"" +
                                             queries[i].query_id + "\"");
                const TermDictionary& dict = *bundle.dict;
                input.vec = to_sparse_vector(it->second, dict);
            }
            results[i] = searcher.search(input, *mode, args.k);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& error : errors)
        if (!error.empty()) throw std::runtime_error(error);
    for (std::size_t i = 0; i < queries.size(); ++i)
        write_run_lines(out, queries[i].query_id, results[i], tag);
    return kExitOk;
}

struct EvalArgs {
    std::string run;
    std::string qrels;
    std::size_t cutoff = 10;
};

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=eval run=" << args.run << " qrels=" << args.qrels
        << " cutoff=" << args.cutoff << '\n';
    TrecRun run = load_run(args.run);
    QrelSet qrels = load_qrels(args.qrels);
    NdcgResult result = ndcg_at_k(run, qrels, args.cutoff);
    if (result.skipped_unknown > 0)
        err << "warning: " << result.skipped_unknown
            << " run query id(s) not present in the qrels were skipped\n";
    for (const auto& [query_id, value] : result.per_query) {
        ordered_json row;
        row["query_id"] = query_id;
        row["ndcg"] = value;
        out << row.dump() << '\n';
    }
    ordered_json summary;
    summary["mean_ndcg"] = result.mean;
    summary["cutoff"] = args.cutoff;
    summary["queries_evaluated"] = result.evaluated;
    summary["queries_without_relevant"] = result.skipped_no_relevant;
    summary["queries_unknown"] = result.skipped_unknown;
    out << summary.dump() << '\n';
    return kExitOk;
}

struct RsjArgs {
    std::string index_dir;
    std::string run;
    std::string qrels;
    std::string queries;
    std::string out_path;
    std::size_t top_k = 100;
    bool timestamps = false;
};

int cmd_rsj(const RsjArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=rsj index=" << args.index_dir << " run=" << args.run
        << " qrels=" << args.qrels << " queries=" << args.queries << " k=" << args.top_k << '\n';
    IndexBundle bundle = load_index_dir(args.index_dir);
    if (!bundle.lexical) throw std::runtime_error("index directory has no lexical index");
    TrecRun run = load_run(args.run);
    QrelSet qrels = load_qrels(args.qrels);
    auto queries = load_queries(args.queries);
    RsjReport report = build_rsj_report(*bundle.lexical, qrels, queries, run, args.top_k,
                                        bundle.meta.analyzer(), bundle.meta.log_base);
    for (const auto& notice : report.notices) err << "notice: " << notice << '\n';
    std::optional<std::string> timestamp;
    if (args.timestamps) timestamp = now_timestamp();
    if (args.out_path.empty()) {
        write_rsj_report(out, report, timestamp);
    } else {
        std::ofstream file(args.out_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open file for writing: " + args.out_path);
        write_rsj_report(file, report, timestamp);
    }
    return kExitOk;
}

struct JaccardArgs {
    std::string corpus_a;
    std::string corpus_b;
    std::string stemming = "on";
};

int cmd_jaccard(const JaccardArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=jaccard corpus_a=" << args.corpus_a
        << " corpus_b=" << args.corpus_b << " stemming=" << args.stemming << '\n';
    AnalyzerConfig analyzer = AnalyzerConfig::english();
    analyzer.stemming = flag_on(args.stemming);
    auto dist_a = TermDistribution::from_corpus(load_corpus(args.corpus_a), analyzer);
    auto dist_b = TermDistribution::from_corpus(load_corpus(args.corpus_b), analyzer);
    ordered_json row;
    row["weighted_jaccard"] = weighted_jaccard(dist_a, dist_b);
    out << row.dump() << '\n';
    return kExitOk;
}

struct ExpandArgs {
    std::string vocab;
    std::string corpus;
    std::string out_path;
    std::string report_path;
    std::string entropy_stop;  // "", "eps1" or "eps2"
    std::size_t delta_v = 3000;
    double eps1 = 0.01;
    double eps2 = 0.1;
};

int cmd_expand_vocab(const ExpandArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=expand-vocab vocab=" << args.vocab << " corpus=" << args.corpus
        << " delta_v=" << args.delta_v << " entropy_stop="
        << (args.entropy_stop.empty() ? "off" : args.entropy_stop)
        << " eps1=" << format_double(args.eps1) << " eps2=" << format_double(args.eps2) << '\n';
    Vocabulary v0 = load_vocabulary(args.vocab);
    auto corpus = read_lines(args.corpus);
    ExpansionConfig config;
    config.delta_v = args.delta_v;
    config.eps1 = args.eps1;
    config.eps2 = args.eps2;
    if (args.entropy_stop == "eps1") config.stop = ExpansionConfig::StopRule::Entropy1;
    if (args.entropy_stop == "eps2") config.stop = ExpansionConfig::StopRule::Entropy2;
    ExpansionResult result = expand_vocabulary(v0, corpus, config);
    save_vocabulary(args.out_path, result.vocab);

    std::ostringstream report;
    for (const auto& row : result.report) {
        ordered_json record;
        record["iteration"] = row.iteration;
        record["target_size"] = row.target_size;
        record["admitted"] = row.admitted;
        record["vocab_size"] = row.vocab_size;
        record["entropy"] = row.entropy;
        report << record.dump() << '\n';
    }
    if (args.report_path.empty()) {
        out << report.str();
    } else {
        write_text_file(args.report_path, report.str());
    }
    err << "expanded vocabulary " << v0.size() << " -> " << result.vocab.size() << " terms\n";
    return kExitOk;
}

struct EntropyArgs {
    std::string vocab;
    std::string corpus;
    std::size_t delta_v = 3000;
    double eps1 = 0.01;
    double eps2 = 0.1;
};

int cmd_entropy(const EntropyArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=entropy vocab=" << args.vocab << " corpus=" << args.corpus
        << " delta_v=" << args.delta_v << " eps1=" << format_double(args.eps1)
        << " eps2=" << format_double(args.eps2) << '\n';
    Vocabulary v0 = load_vocabulary(args.vocab);
    auto corpus = read_lines(args.corpus);
    ExpansionConfig config;
    config.delta_v = args.delta_v;
    config.eps1 = args.eps1;
    config.eps2 = args.eps2;
    EntropyStopReport report = entropy_stop_sizes(v0.size(), corpus, config);
    for (const auto& point : report.curve) {
        ordered_json record;
        record["iteration"] = point.iteration;
        record["target_size"] = point.target_size;
        record["actual_size"] = point.actual_size;
        record["entropy"] = point.entropy;
        if (report.triggers.eps1_iteration)
            record["eps1_triggered"] = point.iteration >= *report.triggers.eps1_iteration;
        if (report.triggers.eps2_iteration)
            record["eps2_triggered"] = point.iteration >= *report.triggers.eps2_iteration;
        out << record.dump() << '\n';
    }
    ordered_json summary;
    summary["eps1"] = args.eps1;
    summary["eps2"] = args.eps2;
    if (report.triggers.eps1_iteration) {
        summary["eps1_trigger_iteration"] = *report.triggers.eps1_iteration;
        summary["eps1_size"] = *report.eps1_size;
    }
    if (report.triggers.eps2_iteration) {
        summary["eps2_trigger_iteration"] = *report.triggers.eps2_iteration;
        summary["eps2_size"] = *report.eps2_size;
    }
    out << summary.dump() << '\n';
    return kExitOk;
}

struct TrainArgs {
    std::string corpus;
    std::string queries;
    std::string triplets;
    std::string out_params;
    std::string stemming = "on";
    double lambda_q = 0.08;
    double lambda_d = 0.1;
    double lr = 0.1;
    std::size_t steps = 50;
    std::size_t dim = 8;
    std::uint64_t seed = 0;
};

int cmd_train_toy(const TrainArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=train-toy corpus=" << args.corpus << " queries=" << args.queries
        << " triplets=" << args.triplets << " lambda_q=" << format_double(args.lambda_q)
        << " lambda_d=" << format_double(args.lambda_d) << " lr=" << format_double(args.lr)
        << " steps=" << args.steps << " dim=" << args.dim << " seed=" << args.seed
        << " stemming=" << args.stemming << '\n';

    AnalyzerConfig analyzer = AnalyzerConfig::english();
    analyzer.stemming = flag_on(args.stemming);
    auto docs = load_corpus(args.corpus);
    auto queries = load_queries(args.queries);
    auto triplet_specs = load_triplets(args.triplets);

    std::map<std::string, std::vector<std::string>> doc_tokens;
    for (const auto& doc : docs)
        doc_tokens[doc.doc_id] = analyze(doc.indexed_text(), analyzer).tokens;
    std::map<std::string, std::vector<std::string>> query_tokens;
    for (const auto& query : queries)
        query_tokens[query.query_id] = analyze(query.text, analyzer).tokens;

    std::set<std::string> vocab_set;
    for (const auto& [id, tokens] : doc_tokens) vocab_set.insert(tokens.begin(), tokens.end());
    for (const auto& [id, tokens] : query_tokens) vocab_set.insert(tokens.begin(), tokens.end());

    TripletBatch batch;
    for (const auto& spec : triplet_specs) {
        auto q = query_tokens.find(spec.query_id);
        if (q == query_tokens.end())
            throw std::runtime_error("triplet references unknown query id \"" + spec.query_id +
                                     "\"");
        auto pos = doc_tokens.find(spec.pos_id);
        if (pos == doc_tokens.end())
            throw std::runtime_error("triplet references unknown document id \"" + spec.pos_id +
                                     "\"");
        auto neg = doc_tokens.find(spec.neg_id);
        if (neg == doc_tokens.end())
            throw std::runtime_error("triplet references unknown document id \"" + spec.neg_id +
                                     "\"");
        batch.rows.push_back({q->second, pos->second, neg->second, spec.teacher_margin});
    }
    if (batch.rows.empty()) throw std::runtime_error("triplet file is empty");

    ToyTrainConfig config;
    config.dim = args.dim;
    config.learning_rate = args.lr;
    config.steps = args.steps;
    config.seed = args.seed;
    config.weights = {args.lambda_q, args.lambda_d};

    ToyTrainResult result =
        train_toy(batch, std::vector<std::string>(vocab_set.begin(), vocab_set.end()), config);
    for (const auto& metric : result.metrics) {
        ordered_json record;
        record["step"] = metric.step;
        record["loss"] = metric.loss;
        record["mean_nnz"] = metric.mean_doc_nnz;
        out << record.dump() << '\n';
    }
    if (!args.out_params.empty()) {
        save_head_params(args.out_params, result.head.params());
        std::ostringstream terms;
        for (const auto& term : result.head.terms()) terms << term << '\n';
        write_text_file(args.out_params + ".vocab", terms.str());
        err << "wrote head parameters to " << args.out_params << '\n';
    }
    return kExitOk;
}

struct EncodeArgs {
    std::string corpus;
    std::string embeddings;
    std::string out_path;
    std::string stemming = "on";
    std::uint64_t seed = 0;
};

int cmd_encode(const EncodeArgs& args, std::ostream& out, std::ostream& err) {
    err << "# config: command=encode corpus=" << args.corpus
        << " embeddings=" << args.embeddings << " seed=" << args.seed
        << " stemming=" << args.stemming << '\n';
    AnalyzerConfig analyzer = AnalyzerConfig::english();
    analyzer.stemming = flag_on(args.stemming);
    auto docs = load_corpus(args.corpus);
    EmbeddingTable table = EmbeddingTable::load(args.embeddings);
    SpladeHead head = SpladeHead::from_embeddings(table, args.seed);
    std::vector<std::string> oov;
    auto vectors = encode_corpus(head, docs, analyzer, &oov);
    for (const auto& term : oov) err << "warning: token \"" << term << "\" is out of vocabulary, skipped\n";

    std::ostringstream buffer;
    for (const auto& vec : vectors) {
        ordered_json record;
        record["id"] = vec.id;
        record["weights"] = nlohmann::json::object();
        for (const auto& [term, weight] : vec.weights) record["weights"][term] = weight;
        buffer << record.dump() << '\n';
    }
    if (args.out_path.empty())
        out << buffer.str();
    else
        write_text_file(args.out_path, buffer.str());
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"sparse retrieval and domain-adaptation toolkit"};
    app.name("sparsekit");
    app.require_subcommand(1);

    auto on_off = CLI::IsMember({"on", "off"});
    auto open_unit = CLI::Validator(
        [](std::string& value) -> std::string {
            double v = 0.0;
            try {
                v = std::stod(value);
            } catch (const std::exception&) {
                return "not a number";
            }
            return (v > 0.0 && v < 1.0) ? "" : "value must be in (0, 1)";
        },
        "FLOAT in (0,1)");

    IndexArgs index_args;
    auto* index_cmd = app.add_subcommand("index", "build a lexical (and optional impact) index");
    index_cmd->add_option("--corpus", index_args.corpus, "corpus file (line-delimited records)")
        ->required();
    index_cmd->add_option("--out", index_args.out_dir, "output index directory")->required();
    index_cmd->add_option("--sparse-vectors", index_args.sparse_vectors,
                          "document sparse vectors to build an impact index from");
    index_cmd->add_option("--idf-weighting", index_args.idf_weighting,
                          "bake IDF reweighting into impact weights")
        ->check(on_off)
        ->capture_default_str();
    index_cmd->add_option("--stemming", index_args.stemming, "analyzer stemming")
        ->check(on_off)
        ->capture_default_str();
    index_cmd->add_option("--log-base", index_args.log_base, "logarithm base for IDF")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    SearchArgs search_args;
    auto* search_cmd = app.add_subcommand("search", "run queries against an index");
    search_cmd->add_option("--index", search_args.index_dir, "index directory")->required();
    search_cmd->add_option("--queries", search_args.queries, "query file (query_id<TAB>text)")
        ->required();
    search_cmd
        ->add_option("--mode", search_args.mode,
                     "bm25 | splade | splade-doc | hybrid-splade | hybrid-splade-doc")
        ->required()
        ->check(CLI::IsMember(
            {"bm25", "splade", "splade-doc", "hybrid-splade", "hybrid-splade-doc"}));
    search_cmd->add_option("--k", search_args.k, "results per query")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    search_cmd->add_option("--query-vectors", search_args.query_vectors,
                           "query sparse vectors (required by splade / hybrid-splade)");
    search_cmd->add_option("--run-tag", search_args.run_tag, "run tag (defaults to the mode)");
    search_cmd->add_option("--k1", search_args.k1, "BM25 k1")->capture_default_str();
    search_cmd->add_option("--b", search_args.b, "BM25 b")->capture_default_str();
    search_cmd->add_option("--log-base", search_args.log_base, "logarithm base for BM25 IDF")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "nDCG over a run file");
    eval_cmd->add_option("--run", eval_args.run, "TREC run file")->required();
    eval_cmd->add_option("--qrels", eval_args.qrels, "TREC qrels file")->required();
    eval_cmd->add_option("--cutoff", eval_args.cutoff, "rank cutoff")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    RsjArgs rsj_args;
    auto* rsj_cmd = app.add_subcommand("rsj", "ideal vs model term-weight analysis");
    rsj_cmd->add_option("--index", rsj_args.index_dir, "index directory")->required();
    rsj_cmd->add_option("--run", rsj_args.run, "TREC run file")->required();
    rsj_cmd->add_option("--qrels", rsj_args.qrels, "TREC qrels file")->required();
    rsj_cmd->add_option("--queries", rsj_args.queries, "query file")->required();
    rsj_cmd->add_option("--k", rsj_args.top_k, "retrieved depth used as the model's relevant set")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rsj_cmd->add_option("--out", rsj_args.out_path, "report file (default: stdout)");
    rsj_cmd->add_flag("--timestamps", rsj_args.timestamps, "include a timestamp header line");

    JaccardArgs jaccard_args;
    auto* jaccard_cmd = app.add_subcommand("jaccard", "weighted Jaccard similarity of two corpora");
    jaccard_cmd->add_option("--corpus-a", jaccard_args.corpus_a, "first corpus")->required();
    jaccard_cmd->add_option("--corpus-b", jaccard_args.corpus_b, "second corpus")->required();
    jaccard_cmd->add_option("--stemming", jaccard_args.stemming, "analyzer stemming")
        ->check(on_off)
        ->capture_default_str();

    ExpandArgs expand_args;
    auto* expand_cmd = app.add_subcommand("expand-vocab", "iterative vocabulary expansion");
    expand_cmd->add_option("--vocab", expand_args.vocab, "base vocabulary file")->required();
    expand_cmd->add_option("--corpus", expand_args.corpus, "domain corpus (one document per line)")
        ->required();
    expand_cmd->add_option("--out", expand_args.out_path, "expanded vocabulary file")->required();
    expand_cmd->add_option("--delta-v", expand_args.delta_v, "per-iteration size increment")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    expand_cmd
        ->add_option("--entropy-stop", expand_args.entropy_stop,
                     "replace the default stop rule with an entropy criterion")
        ->check(CLI::IsMember({"eps1", "eps2"}));
    expand_cmd->add_option("--eps1", expand_args.eps1, "criterion 1 threshold")
        ->check(open_unit)
        ->capture_default_str();
    expand_cmd->add_option("--eps2", expand_args.eps2, "criterion 2 coefficient")
        ->check(open_unit)
        ->capture_default_str();
    expand_cmd->add_option("--report", expand_args.report_path,
                           "per-iteration report file (default: stdout)");

    EntropyArgs entropy_args;
    auto* entropy_cmd =
        app.add_subcommand("entropy", "entropy curve and stopping criteria over tokenizer sizes");
    entropy_cmd->add_option("--vocab", entropy_args.vocab, "base vocabulary file")->required();
    entropy_cmd
        ->add_option("--corpus", entropy_args.corpus, "domain corpus (one document per line)")
        ->required();
    entropy_cmd->add_option("--delta-v", entropy_args.delta_v, "per-iteration size increment")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    entropy_cmd->add_option("--eps1", entropy_args.eps1, "criterion 1 threshold")
        ->check(open_unit)
        ->capture_default_str();
    entropy_cmd->add_option("--eps2", entropy_args.eps2, "criterion 2 coefficient")
        ->check(open_unit)
        ->capture_default_str();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train-toy", "toy distillation training loop");
    train_cmd->add_option("--corpus", train_args.corpus, "corpus file")->required();
    train_cmd->add_option("--queries", train_args.queries, "query file")->required();
    train_cmd->add_option("--triplets", train_args.triplets, "triplet file")->required();
    train_cmd->add_option("--lambda-q", train_args.lambda_q, "query-side regularizer weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    train_cmd->add_option("--lambda-d", train_args.lambda_d, "document-side regularizer weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    train_cmd->add_option("--lr", train_args.lr, "learning rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train_cmd->add_option("--steps", train_args.steps, "gradient steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train_cmd->add_option("--dim", train_args.dim, "embedding dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train_cmd->add_option("--seed", train_args.seed, "initialization seed")->required();
    train_cmd->add_option("--out-params", train_args.out_params,
                          "write final head parameters (plus .vocab sidecar)");
    train_cmd->add_option("--stemming", train_args.stemming, "analyzer stemming")
        ->check(on_off)
        ->capture_default_str();

    EncodeArgs encode_args;
    auto* encode_cmd = app.add_subcommand("encode", "encode a corpus into sparse vectors");
    encode_cmd->add_option("--corpus", encode_args.corpus, "corpus file")->required();
    encode_cmd->add_option("--embeddings", encode_args.embeddings,
                           "embedding table (term value1 ... valueD)")
        ->required();
    encode_cmd->add_option("--seed", encode_args.seed, "seed for unset parameters")->required();
    encode_cmd->add_option("--out", encode_args.out_path, "output file (default: stdout)");
    encode_cmd->add_option("--stemming", encode_args.stemming, "analyzer stemming")
        ->check(on_off)
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*index_cmd) return cmd_index(index_args, out, err);
        if (*search_cmd) return cmd_search(search_args, out, err);
        if (*eval_cmd) return cmd_eval(eval_args, out, err);
        if (*rsj_cmd) return cmd_rsj(rsj_args, out, err);
        if (*jaccard_cmd) return cmd_jaccard(jaccard_args, out, err);
        if (*expand_cmd) return cmd_expand_vocab(expand_args, out, err);
        if (*entropy_cmd) return cmd_entropy(entropy_args, out, err);
        if (*train_cmd) return cmd_train_toy(train_args, out, err);
        if (*encode_cmd) return cmd_encode(encode_args, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    err << "error: no command given\n";
    return kExitUsage;
}

}  // namespace sparsekit
