#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wembsim/wembsim.hpp"

namespace {

using namespace wembsim;
namespace hn = wembsim::harness;

struct CommonArgs {
    std::string embeddings;
    std::string format = "text";
    std::string metrics = "wembsim";
    std::string rule = "mean";
    std::string stopwords;
    std::string normalization = "minmax";
    std::string output;
    std::uint64_t seed = 42;
    std::size_t refs_per_pair = 5;
    bool signed_cosine = false;
    bool strict = false;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--embeddings", args.embeddings, "Path to the embedding table")->required();
    cmd->add_option("--format", args.format, "Embedding file format")
        ->check(CLI::IsMember({"text", "word2vec-bin"}));
    cmd->add_option("--metrics", args.metrics,
                    "Comma-separated metric list (wembsim,bleu4,rouge_l,cider,wcd,wmd)");
    cmd->add_option("--rule", args.rule, "Combining rule over references")
        ->check(CLI::IsMember({"max", "mean", "min"}));
    cmd->add_option("--stopwords", args.stopwords, "Stopword override file (one word per line)");
    cmd->add_option("--seed", args.seed, "Seed for the xorshift64* reference sampler");
    cmd->add_option("--refs-per-pair", args.refs_per_pair,
                    "References drawn per pairwise instance");
    cmd->add_option("--normalization", args.normalization, "Score normalization for combine")
        ->check(CLI::IsMember({"minmax", "zscore", "none"}));
    cmd->add_flag("--signed-cosine", args.signed_cosine,
                  "Drop the absolute value from the cosine numerator");
    cmd->add_flag("--strict", args.strict, "Exit with status 1 when warnings were produced");
    cmd->add_option("--output", args.output, "Report path (default: stdout)");
}

CombiningRule parse_rule(const std::string& name) {
    if (name == "max") return CombiningRule::Max;
    if (name == "min") return CombiningRule::Min;
    return CombiningRule::Mean;
}

Normalization parse_normalization(const std::string& name) {
    if (name == "zscore") return Normalization::ZScore;
    if (name == "none") return Normalization::None;
    return Normalization::MinMax;
}

EmbeddingTable load_table(const CommonArgs& args) {
    if (args.format == "word2vec-bin") return load_word2vec_binary(args.embeddings);
    return load_text_vectors(args.embeddings);
}

hn::MetricEngine make_engine(const CommonArgs& args, const EmbeddingTable& table) {
    hn::HarnessOptions options;
    options.score.rule = parse_rule(args.rule);
    options.score.signed_cosine = args.signed_cosine;
    options.seed = args.seed;
    options.refs_per_pair = args.refs_per_pair;
    options.normalization = parse_normalization(args.normalization);
    StopwordList stopwords =
        args.stopwords.empty() ? StopwordList::nltk_english() : StopwordList::from_file(args.stopwords);
    return hn::MetricEngine(table, std::move(stopwords), options);
}

void write_report(const CommonArgs& args, const std::string& report) {
    if (args.output.empty()) {
        std::cout << report;
        return;
    }
    std::ofstream out(args.output, std::ios::binary);
    if (!out) throw error("cannot write output file: " + args.output);
    out << report;
}

int finish(const CommonArgs& args, const hn::RunResult& result, std::size_t extra_warnings = 0) {
    write_report(args, result.report);
    const std::size_t warnings = result.warnings + extra_warnings;
    if (warnings > 0) {
        std::cerr << "warning: " << warnings
                  << " issue(s): skipped rows, excluded systems, or duplicate vocabulary\n";
        if (args.strict) return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"WEmbSim caption-evaluation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string input;
    std::string target = "M1";

    auto* score = app.add_subcommand("score", "Score candidate captions against references");
    score->add_option("input", input, "ScoringInstance JSON-lines file")->required();
    add_common_flags(score, args);

    auto* eval_corr =
        app.add_subcommand("eval-corr", "System-level correlation against human assessments");
    eval_corr->add_option("input", input, "SystemEntry JSON-lines file")->required();
    eval_corr->add_option("--target", target, "Human assessment column")
        ->check(CLI::IsMember({"M1", "M2"}));
    add_common_flags(eval_corr, args);

    auto* eval_pairwise =
        app.add_subcommand("eval-pairwise", "Pairwise human-consensus accuracy");
    eval_pairwise->add_option("input", input, "PairwiseInstance JSON-lines file")->required();
    add_common_flags(eval_pairwise, args);

    auto* eval_distraction =
        app.add_subcommand("eval-distraction", "Forced-choice accuracy on perturbed captions");
    eval_distraction->add_option("input", input, "DistractionInstance JSON-lines file")->required();
    add_common_flags(eval_distraction, args);

    auto* corr_matrix =
        app.add_subcommand("corr-matrix", "Pairwise Spearman correlation of metrics");
    corr_matrix->add_option("input", input, "SystemEntry JSON-lines file")->required();
    add_common_flags(corr_matrix, args);

    auto* combine =
        app.add_subcommand("combine", "Correlation of a linear two-metric combination vs M1");
    combine->add_option("input", input, "SystemEntry JSON-lines file")->required();
    add_common_flags(combine, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // --help exits 0, usage errors are parse failures
    }

    try {
        const EmbeddingTable table = load_table(args);
        hn::MetricEngine engine = make_engine(args, table);
        const auto metrics = hn::parse_metric_list(args.metrics);
        const std::size_t duplicate_warnings = table.duplicates_dropped() > 0 ? 1 : 0;
        if (table.duplicates_dropped() > 0) {
            std::cerr << "warning: " << table.duplicates_dropped()
                      << " duplicate word(s) dropped while loading " << table.name() << "\n";
        }

        if (score->parsed()) {
            std::size_t skipped = 0;
            const auto instances = harness::read_scoring_instances(input, &skipped);
            return finish(args, hn::run_score(instances, engine, metrics, skipped),
                          duplicate_warnings);
        }
        if (eval_corr->parsed()) {
            const auto systems = harness::read_system_entries(input);
            const auto human_target =
                target == "M2" ? hn::HumanTarget::M2 : hn::HumanTarget::M1;
            return finish(args, hn::run_eval_corr(systems, engine, metrics, human_target),
                          duplicate_warnings);
        }
        if (eval_pairwise->parsed()) {
            const auto pairs = harness::read_pairwise_instances(input);
            return finish(args, hn::run_eval_pairwise(pairs, engine, metrics), duplicate_warnings);
        }
        if (eval_distraction->parsed()) {
            const auto instances = harness::read_distraction_instances(input);
            return finish(args, hn::run_eval_distraction(instances, engine, metrics),
                          duplicate_warnings);
        }
        if (corr_matrix->parsed()) {
            const auto systems = harness::read_system_entries(input);
            return finish(args, hn::run_corr_matrix(systems, engine, metrics), duplicate_warnings);
        }
        if (combine->parsed()) {
            if (metrics.size() != 2) {
                throw error("combine needs exactly two metrics, e.g. --metrics bleu4,wembsim");
            }
            const auto systems = harness::read_system_entries(input);
            return finish(args, hn::run_combine(systems, engine, metrics[0], metrics[1]),
                          duplicate_warnings);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
