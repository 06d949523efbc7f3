// SPDX-License-Identifier: Apache-2.0
//
// reccheck: run behavioral test suites against recommenders, compare
// reports, and generate synthetic datasets.

#include "reccheck/dataset.hpp"
#include "reccheck/error.hpp"
#include "reccheck/harness.hpp"
#include "reccheck/models.hpp"
#include "reccheck/report.hpp"
#include "reccheck/syngen.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace reccheck;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kRemote = 3 };

struct RunArgs {
    std::string interactions;
    std::string catalog;
    std::string format = "jsonl";
    std::string task = "complementary";
    std::string model = "p2v";
    std::string endpoint;
    int timeout_ms = 5000;
    int retries = 2;
    std::string bearer_token;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    std::string tests = "all";
    std::string out;
    std::optional<std::int64_t> gap_ms;
    std::optional<double> split_fraction;
    std::optional<std::int64_t> split_ts;
    std::size_t dim = EmbeddingConfig{}.dim;
    std::size_t window = EmbeddingConfig{}.window;
    std::size_t negatives = EmbeddingConfig{}.negatives;
    std::size_t epochs = EmbeddingConfig{}.epochs;
    std::size_t batch_size = 128;
};

struct CompareArgs {
    std::string a;
    std::string b;
    std::string format = "table";
};

struct GenArgs {
    std::string preset = "clustered";
    std::string out_dir;
    SynSpec spec;
};

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("reccheck");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
    const char* env = std::getenv("RECCHECK_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int cmd_run(const RunArgs& args) {
    const auto format = parse_file_format(args.format);
    if (!format) throw ConfigError("unknown format '" + args.format + "'");
    const auto task = parse_task(args.task);
    if (!task) throw ConfigError("unknown task '" + args.task + "'");

    SuiteSpec spec;
    spec.task = *task;
    spec.k = args.k;
    spec.seed = args.seed;
    spec.tests = parse_test_list(args.tests);
    spec.batch_size = args.batch_size;
    spec.embedding.dim = args.dim;
    spec.embedding.window = args.window;
    spec.embedding.negatives = args.negatives;
    spec.embedding.epochs = args.epochs;

    SplitRule rule = SplitByFraction{0.2};
    if (args.split_ts) rule = SplitAtTimestamp{*args.split_ts};
    if (args.split_fraction) rule = SplitByFraction{*args.split_fraction};

    const auto sessions = sessionize(load_interactions(args.interactions, *format), args.gap_ms);
    Dataset dataset = make_dataset(sessions, load_catalog(args.catalog, *format), rule);
    spdlog::info("{} train / {} test sessions, {} catalog items", dataset.train.size(), dataset.test.size(),
                 dataset.catalog.size());
    check_spec(spec, dataset);

    std::unique_ptr<RecModel> model;
    if (args.model == "popularity") {
        model = std::make_unique<PopularityModel>(dataset.train);
    } else if (args.model == "cooccurrence") {
        model = std::make_unique<CooccurrenceModel>(dataset.train);
    } else if (args.model == "p2v") {
        EmbeddingConfig config = spec.embedding;
        config.seed = spec.seed;
        model = std::make_unique<Prod2VecModel>(
            std::make_shared<const EmbeddingSpace>(train_item_space(dataset, config)));
    } else if (args.model == "remote") {
        if (args.endpoint.empty()) throw ConfigError("--model remote requires --endpoint");
        RemoteModelOptions opts;
        opts.endpoint = args.endpoint;
        opts.timeout = std::chrono::milliseconds(args.timeout_ms);
        opts.max_retries = args.retries;
        opts.batch_size = args.batch_size;
        if (!args.bearer_token.empty()) opts.bearer_token = args.bearer_token;
        model = std::make_unique<RemoteModel>(opts);
    } else {
        throw ConfigError("unknown model '" + args.model + "'");
    }

    const RecReport report = run_suite(dataset, *model, spec);
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw DataError("cannot write '" + args.out + "'");
    out << serialize_report(report);

    std::size_t failed = 0;
    for (const auto& r : report.results)
        if (r.error) ++failed;
    std::cerr << "wrote " << args.out << ": " << report.results.size() << " tests, " << failed << " failed, "
              << report.n_test_cases << " cases\n";
    return kOk;
}

int cmd_compare(const CompareArgs& args) {
    const auto a = parse_report(read_text(args.a));
    const auto b = parse_report(read_text(args.b));
    const auto cmp = compare_reports(a, b);
    if (args.format == "json") {
        std::cout << to_json(cmp).dump(2) << '\n';
    } else {
        std::cout << format_table(cmp);
    }
    return kOk;
}

int cmd_gen(GenArgs args) {
    if (args.preset == "clustered") {
        args.spec.preset = SynPreset::clustered;
    } else if (args.preset == "zipf") {
        args.spec.preset = SynPreset::zipf;
    } else {
        throw ConfigError("unknown preset '" + args.preset + "'");
    }
    const auto data = generate(args.spec);
    write_syndata(data, args.out_dir);
    std::cerr << "wrote " << data.interactions.size() << " interactions and " << data.catalog.size()
              << " items to " << args.out_dir << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"reccheck: behavioral testing for recommender systems"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Evaluate a model and write a report");
    run_cmd->add_option("--interactions", run.interactions, "Interaction log")->required();
    run_cmd->add_option("--catalog", run.catalog, "Item catalog")->required();
    run_cmd->add_option("--format", run.format, "Input format")->check(CLI::IsMember({"jsonl", "csv"}));
    run_cmd->add_option("--task", run.task, "Recommendation task")
        ->check(CLI::IsMember({"similar", "complementary", "session"}));
    run_cmd->add_option("--model", run.model, "Model under test")
        ->check(CLI::IsMember({"popularity", "cooccurrence", "p2v", "remote"}));
    run_cmd->add_option("--endpoint", run.endpoint, "Remote model URL");
    run_cmd->add_option("--timeout-ms", run.timeout_ms, "Remote request timeout");
    run_cmd->add_option("--retries", run.retries, "Remote retries after the first attempt");
    run_cmd->add_option("--bearer-token", run.bearer_token, "Remote bearer token");
    run_cmd->add_option("--k", run.k, "Cut-off for ranked metrics");
    run_cmd->add_option("--seed", run.seed, "Seed for embeddings and probes");
    run_cmd->add_option("--tests", run.tests, "Comma-separated test names or 'all'");
    run_cmd->add_option("--out", run.out, "Report path")->required();
    run_cmd->add_option("--gap-ms", run.gap_ms, "Split sessions at gaps longer than this");
    auto* frac = run_cmd->add_option("--split-fraction", run.split_fraction, "Fraction of latest sessions for test");
    auto* ts = run_cmd->add_option("--split-ts", run.split_ts, "Sessions starting at or after this go to test");
    frac->excludes(ts);
    run_cmd->add_option("--dim", run.dim, "Embedding dimension");
    run_cmd->add_option("--window", run.window, "Skip-gram window");
    run_cmd->add_option("--negatives", run.negatives, "Negative samples per pair");
    run_cmd->add_option("--epochs", run.epochs, "Training epochs");
    run_cmd->add_option("--batch-size", run.batch_size, "Queries per predict call");

    CompareArgs compare;
    auto* cmp_cmd = app.add_subcommand("compare", "Compare two reports");
    cmp_cmd->add_option("a", compare.a, "Baseline report")->required();
    cmp_cmd->add_option("b", compare.b, "Candidate report")->required();
    cmp_cmd->add_option("--format", compare.format, "Output format")->check(CLI::IsMember({"table", "json"}));

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
    gen_cmd->add_option("--preset", gen.preset, "Dataset preset")->check(CLI::IsMember({"clustered", "zipf"}));
    gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->required();
    gen_cmd->add_option("--seed", gen.spec.seed, "Generator seed");
    gen_cmd->add_option("--clusters", gen.spec.n_clusters, "Number of clusters");
    gen_cmd->add_option("--items-per-cluster", gen.spec.items_per_cluster, "Items per cluster (clustered)");
    gen_cmd->add_option("--sessions", gen.spec.n_sessions, "Number of sessions");
    gen_cmd->add_option("--min-len", gen.spec.session_len_min, "Shortest session");
    gen_cmd->add_option("--max-len", gen.spec.session_len_max, "Longest session");
    gen_cmd->add_option("--noise", gen.spec.cross_cluster_noise, "Cross-cluster draw probability");
    gen_cmd->add_option("--zipf-exponent", gen.spec.zipf_exponent, "Zipf exponent (zipf)");
    gen_cmd->add_option("--zipf-items", gen.spec.zipf_items, "Item count (zipf)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*cmp_cmd) return cmd_compare(compare);
        if (*gen_cmd) return cmd_gen(gen);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ContractViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const RemoteError& e) {
        std::cerr << "remote error: " << e.what() << '\n';
        return kRemote;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
