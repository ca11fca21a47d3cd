#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "wembsim/baselines.hpp"
#include "wembsim/dataset.hpp"
#include "wembsim/embedding_table.hpp"
#include "wembsim/error.hpp"
#include "wembsim/preprocess.hpp"
#include "wembsim/rng.hpp"
#include "wembsim/score.hpp"
#include "wembsim/stats.hpp"
#include "wembsim/transport.hpp"

namespace wembsim::harness {

enum class Metric { WembSim, Bleu4, RougeL, Cider, Wcd, Wmd };

// Canonical metric order; reports list metrics in this order regardless of
// how the request was spelled.
inline constexpr std::array<Metric, 6> kAllMetrics = {
    Metric::WembSim, Metric::Bleu4, Metric::RougeL, Metric::Cider, Metric::Wcd, Metric::Wmd,
};

inline const char* to_string(Metric metric) {
    switch (metric) {
        case Metric::WembSim: return "wembsim";
        case Metric::Bleu4: return "bleu4";
        case Metric::RougeL: return "rouge_l";
        case Metric::Cider: return "cider";
        case Metric::Wcd: return "wcd";
        case Metric::Wmd: return "wmd";
    }
    return "?";
}

inline std::optional<Metric> metric_from_string(std::string_view name) {
    for (Metric metric : kAllMetrics) {
        if (name == to_string(metric)) return metric;
    }
    return std::nullopt;
}

// Comma-separated metric list -> canonical-order metric set.
inline std::vector<Metric> parse_metric_list(std::string_view csv) {
    std::unordered_set<int> requested;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        std::string_view item =
            csv.substr(start, comma == std::string_view::npos ? csv.size() - start : comma - start);
        while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
        while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.remove_suffix(1);
        if (!item.empty()) {
            auto metric = metric_from_string(item);
            if (!metric) throw error("unknown metric '" + std::string(item) + "'");
            requested.insert(static_cast<int>(*metric));
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (requested.empty()) throw error("empty metric list");
    std::vector<Metric> metrics;
    for (Metric metric : kAllMetrics) {
        if (requested.count(static_cast<int>(metric)) > 0) metrics.push_back(metric);
    }
    return metrics;
}

struct HarnessOptions {
    ScoreOptions score;                 // combining rule + signed-cosine knob
    WmdParams wmd;
    std::uint64_t seed = 42;
    std::size_t refs_per_pair = 5;
    Normalization normalization = Normalization::MinMax;
};

// Per-request scoring context: owns the preprocessing policy of every
// metric. WEmbSim drops stopwords and OOV tokens; WCD/WMD drop only OOV
// tokens; the n-gram baselines score raw tokenized text.
class MetricEngine {
public:
    MetricEngine(const EmbeddingTable& table, StopwordList stopwords, HarnessOptions options = {})
        : table_(&table), stopwords_(std::move(stopwords)), options_(options) {}

    const HarnessOptions& options() const { return options_; }
    const EmbeddingTable& table() const { return *table_; }

    // One document per image; required before cider() evaluations.
    void build_idf(std::span<const std::vector<std::string>> reference_documents) {
        std::vector<std::vector<Caption>> corpus;
        corpus.reserve(reference_documents.size());
        for (const auto& document : reference_documents) {
            std::vector<Caption> captions;
            captions.reserve(document.size());
            for (const auto& text : document) captions.push_back(surface_caption(text));
            corpus.push_back(std::move(captions));
        }
        idf_ = cider_build_idf(corpus);
    }

    bool has_idf() const { return idf_.has_value(); }

    MetricValue evaluate(Metric metric, const std::string& candidate,
                         std::span<const std::string> references) const {
        switch (metric) {
            case Metric::WembSim: return eval_wembsim(candidate, references);
            case Metric::Bleu4: return eval_bleu(candidate, references);
            case Metric::RougeL: return eval_rouge(candidate, references);
            case Metric::Cider: return eval_cider(candidate, references);
            case Metric::Wcd: return eval_embedding_distance(candidate, references, false);
            case Metric::Wmd: return eval_embedding_distance(candidate, references, true);
        }
        throw error("unreachable metric");
    }

    Caption surface_caption(const std::string& text) const {
        return make_caption(text, StopwordList::none(), nullptr);
    }
    Caption embedding_caption(const std::string& text) const {
        return make_caption(text, StopwordList::none(), table_);
    }
    Caption wembsim_caption(const std::string& text) const {
        return make_caption(text, stopwords_, table_);
    }

private:
    MetricValue eval_wembsim(const std::string& candidate,
                             std::span<const std::string> references) const {
        std::vector<Caption> refs;
        refs.reserve(references.size());
        for (const auto& text : references) refs.push_back(wembsim_caption(text));
        const Score score = wembsim_score(wembsim_caption(candidate), refs, *table_, options_.score);
        return {score.value, score.degenerate};
    }

    MetricValue eval_bleu(const std::string& candidate,
                          std::span<const std::string> references) const {
        const Caption cand = surface_caption(candidate);
        std::vector<Caption> refs;
        refs.reserve(references.size());
        for (const auto& text : references) refs.push_back(surface_caption(text));
        return {bleu4(cand, refs), cand.tokens.empty()};
    }

    MetricValue eval_rouge(const std::string& candidate,
                           std::span<const std::string> references) const {
        const Caption cand = surface_caption(candidate);
        std::vector<Caption> refs;
        refs.reserve(references.size());
        for (const auto& text : references) refs.push_back(surface_caption(text));
        return {rouge_l(cand, refs), cand.tokens.empty()};
    }

    MetricValue eval_cider(const std::string& candidate,
                           std::span<const std::string> references) const {
        if (!idf_) throw error("cider requested without an idf corpus");
        const Caption cand = surface_caption(candidate);
        std::vector<Caption> refs;
        refs.reserve(references.size());
        for (const auto& text : references) refs.push_back(surface_caption(text));
        return cider(cand, refs, *idf_);
    }

    // WCD / WMD as exp(-distance) similarities, combined over the reference
    // set by the configured rule like every other multi-reference metric.
    MetricValue eval_embedding_distance(const std::string& candidate,
                                        std::span<const std::string> references,
                                        bool word_mover) const {
        const Caption cand = embedding_caption(candidate);
        if (cand.tokens.empty()) return {0.0, true};

        double best_max = 0.0, best_min = 0.0, sum = 0.0;
        std::size_t used = 0;
        for (const auto& text : references) {
            const Caption ref = embedding_caption(text);
            if (ref.tokens.empty()) continue;
            const double similarity =
                word_mover ? wmd_similarity(cand, ref, *table_, options_.wmd)
                           : std::exp(-wcd(cand, ref, *table_));
            if (used == 0) {
                best_max = best_min = similarity;
            } else {
                best_max = std::max(best_max, similarity);
                best_min = std::min(best_min, similarity);
            }
            sum += similarity;
            ++used;
        }
        if (used == 0) return {0.0, true};
        switch (options_.score.rule) {
            case CombiningRule::Max: return {best_max, false};
            case CombiningRule::Min: return {best_min, false};
            case CombiningRule::Mean: default: return {sum / static_cast<double>(used), false};
        }
    }

    const EmbeddingTable* table_;
    StopwordList stopwords_;
    HarnessOptions options_;
    std::optional<CiderIdf> idf_;
};

struct RunResult {
    std::string report;
    std::size_t warnings = 0;
};

namespace detail {

inline std::string format_value(double value) {
    if (std::isnan(value)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

inline std::string format_p(double value) {
    if (std::isnan(value)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

inline std::string metric_list_string(std::span<const Metric> metrics) {
    std::string out;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        if (i > 0) out += ',';
        out += to_string(metrics[i]);
    }
    return out;
}

inline void write_header(std::ostringstream& out, const char* command, const MetricEngine& engine,
                         std::span<const Metric> metrics) {
    const auto& options = engine.options();
    out << "# wembsim " << command << " report\n";
    out << "# embeddings: " << engine.table().name() << "\n";
    out << "# metrics: " << metric_list_string(metrics) << "\n";
    out << "# rule: " << to_string(options.score.rule) << "\n";
    out << "# signed-cosine: " << (options.score.signed_cosine ? "on" : "off") << "\n";
    out << "# seed: " << options.seed << "\n";
}

// Reference documents for the idf corpus, one per distinct image id
// (first occurrence wins).
inline std::vector<std::vector<std::string>> idf_documents(
    std::span<const ScoringInstance> instances) {
    std::vector<std::vector<std::string>> documents;
    std::unordered_set<std::string> seen;
    for (const auto& instance : instances) {
        if (seen.insert(instance.image_id).second) documents.push_back(instance.references);
    }
    return documents;
}

inline bool contains(std::span<const Metric> metrics, Metric metric) {
    for (Metric m : metrics) {
        if (m == metric) return true;
    }
    return false;
}

// Mean per-instance score of one system under one metric.
inline double system_level_score(const MetricEngine& engine, Metric metric,
                                 const SystemEntry& system) {
    double sum = 0.0;
    for (const auto& instance : system.instances) {
        sum += engine.evaluate(metric, instance.candidate, instance.references).value;
    }
    return sum / static_cast<double>(system.instances.size());
}

} // namespace detail

// One row per instance per requested metric, input order then canonical
// metric order.
inline RunResult run_score(std::span<const ScoringInstance> instances, MetricEngine& engine,
                           std::span<const Metric> metrics, std::size_t skipped_rows = 0) {
    if (detail::contains(metrics, Metric::Cider)) {
        engine.build_idf(detail::idf_documents(instances));
    }
    std::ostringstream out;
    detail::write_header(out, "score", engine, metrics);
    out << "# skipped_rows: " << skipped_rows << "\n";
    out << "image_id\tmetric\tvalue\tdegenerate\n";
    for (const auto& instance : instances) {
        for (Metric metric : metrics) {
            const MetricValue value = engine.evaluate(metric, instance.candidate, instance.references);
            out << instance.image_id << '\t' << to_string(metric) << '\t'
                << detail::format_value(value.value) << '\t' << (value.degenerate ? 1 : 0) << '\n';
        }
    }
    return {out.str(), skipped_rows};
}

enum class HumanTarget { M1, M2 };

inline const char* to_string(HumanTarget target) {
    return target == HumanTarget::M1 ? "M1" : "M2";
}

// System-level Pearson correlation of each metric against the chosen human
// assessment. Systems without the target score are excluded with a warning.
inline RunResult run_eval_corr(std::span<const SystemEntry> systems, MetricEngine& engine,
                               std::span<const Metric> metrics, HumanTarget target) {
    std::vector<const SystemEntry*> usable;
    std::size_t excluded = 0;
    for (const auto& system : systems) {
        const auto& score = target == HumanTarget::M1 ? system.m1 : system.m2;
        if (score.has_value()) {
            usable.push_back(&system);
        } else {
            ++excluded;
        }
    }
    if (usable.size() < 3) {
        throw error("eval-corr needs at least 3 systems with " + std::string(to_string(target)) +
                    " scores, got " + std::to_string(usable.size()));
    }

    if (detail::contains(metrics, Metric::Cider)) {
        std::vector<ScoringInstance> all;
        for (const auto* system : usable) {
            all.insert(all.end(), system->instances.begin(), system->instances.end());
        }
        engine.build_idf(detail::idf_documents(all));
    }

    std::vector<double> human;
    human.reserve(usable.size());
    for (const auto* system : usable) {
        human.push_back(target == HumanTarget::M1 ? *system->m1 : *system->m2);
    }

    std::ostringstream out;
    detail::write_header(out, "eval-corr", engine, metrics);
    out << "# target: " << to_string(target) << "\n";
    out << "# excluded_systems: " << excluded << "\n";
    out << "# p-values: two-tailed (Student t, n-2 dof)\n";
    out << "metric\tpearson_r\tp_value\tn_systems\n";
    for (Metric metric : metrics) {
        std::vector<double> scores;
        scores.reserve(usable.size());
        for (const auto* system : usable) {
            scores.push_back(detail::system_level_score(engine, metric, *system));
        }
        out << to_string(metric) << '\t';
        try {
            const CorrelationResult result = pearson({scores, human, {}});
            out << detail::format_value(result.coefficient) << '\t'
                << detail::format_p(result.p_value) << '\t' << result.n << '\n';
        } catch (const undefined_correlation_error&) {
            out << "NA\tNA\t" << usable.size() << '\n';
        }
    }
    return {out.str(), excluded};
}

// Pairwise human-consensus protocol: per instance, draw refs_per_pair
// references from the pool without replacement (one seeded generator,
// instances in file order, draws shared by every metric), score both
// captions against the same drawn set, and tally strict-preference
// accuracy per category.
inline RunResult run_eval_pairwise(std::span<const PairwiseInstance> instances, MetricEngine& engine,
                                   std::span<const Metric> metrics) {
    const std::size_t k = engine.options().refs_per_pair;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].reference_pool.size() < k) {
            throw error("reference pool of instance " + std::to_string(i + 1) + " ('" +
                        instances[i].caption_a + "' vs '" + instances[i].caption_b + "') has " +
                        std::to_string(instances[i].reference_pool.size()) + " captions, need " +
                        std::to_string(k));
        }
    }
    if (detail::contains(metrics, Metric::Cider)) {
        std::vector<std::vector<std::string>> documents;
        documents.reserve(instances.size());
        for (const auto& instance : instances) documents.push_back(instance.reference_pool);
        engine.build_idf(documents);
    }

    Xorshift64Star rng(engine.options().seed);
    std::map<std::pair<std::string, int>, std::vector<PreferencePair>> tally;
    for (const auto& instance : instances) {
        const auto drawn = sample_without_replacement(instance.reference_pool.size(), k, rng);
        std::vector<std::string> references;
        references.reserve(k);
        for (std::size_t index : drawn) references.push_back(instance.reference_pool[index]);
        for (Metric metric : metrics) {
            PreferencePair pair;
            pair.score_a = engine.evaluate(metric, instance.caption_a, references).value;
            pair.score_b = engine.evaluate(metric, instance.caption_b, references).value;
            pair.human_prefers = instance.human_prefers == 'A' ? PreferencePair::Choice::A
                                                               : PreferencePair::Choice::B;
            tally[{instance.category, static_cast<int>(metric)}].push_back(pair);
        }
    }

    std::ostringstream out;
    detail::write_header(out, "eval-pairwise", engine, metrics);
    out << "# refs-per-pair: " << k << "\n";
    out << "category\tmetric\taccuracy\tties\tn\n";
    for (const char* category : {"HHC", "HHI"}) {
        for (Metric metric : metrics) {
            auto it = tally.find({category, static_cast<int>(metric)});
            if (it == tally.end()) continue;
            const AccuracyResult result = pairwise_accuracy(it->second);
            out << category << '\t' << to_string(metric) << '\t'
                << detail::format_value(result.accuracy) << '\t' << result.ties << '\t'
                << result.total << '\n';
        }
    }
    return {out.str(), 0};
}

// Binary forced choice against perturbed captions, Table-IV-shaped: one row
// per metric, accuracy per category plus their unweighted mean.
inline RunResult run_eval_distraction(std::span<const DistractionInstance> instances,
                                      MetricEngine& engine, std::span<const Metric> metrics) {
    static constexpr std::array<const char*, 4> kCategories = {"SP", "SS", "JP", "JS"};
    if (detail::contains(metrics, Metric::Cider)) {
        std::vector<std::vector<std::string>> documents;
        documents.reserve(instances.size());
        for (const auto& instance : instances) documents.push_back(instance.references);
        engine.build_idf(documents);
    }

    std::ostringstream out;
    detail::write_header(out, "eval-distraction", engine, metrics);
    out << "metric\tSP\tSS\tJP\tJS\tavg\tties_SP\tties_SS\tties_JP\tties_JS\n";
    for (Metric metric : metrics) {
        std::array<std::vector<std::pair<double, double>>, 4> buckets;
        for (const auto& instance : instances) {
            const MetricValue correct =
                engine.evaluate(metric, instance.correct, instance.references);
            const MetricValue distractor =
                engine.evaluate(metric, instance.distractor, instance.references);
            for (std::size_t c = 0; c < kCategories.size(); ++c) {
                if (instance.category == kCategories[c]) {
                    buckets[c].emplace_back(correct.value, distractor.value);
                }
            }
        }
        std::array<AccuracyResult, 4> results;
        double sum = 0.0;
        bool complete = true;
        for (std::size_t c = 0; c < kCategories.size(); ++c) {
            results[c] = forced_choice_accuracy(buckets[c]);
            if (buckets[c].empty()) {
                complete = false;
            } else {
                sum += results[c].accuracy;
            }
        }
        out << to_string(metric);
        for (std::size_t c = 0; c < kCategories.size(); ++c) {
            out << '\t' << (buckets[c].empty() ? "NA" : detail::format_value(results[c].accuracy));
        }
        out << '\t' << (complete ? detail::format_value(sum / 4.0) : "NA");
        for (std::size_t c = 0; c < kCategories.size(); ++c) out << '\t' << results[c].ties;
        out << '\n';
    }
    return {out.str(), 0};
}

// Square Spearman matrix over system-level metric scores, metric names on
// both axes; undefined cells print NA.
inline RunResult run_corr_matrix(std::span<const SystemEntry> systems, MetricEngine& engine,
                                 std::span<const Metric> metrics) {
    if (systems.size() < 3) {
        throw error("corr-matrix needs at least 3 systems, got " + std::to_string(systems.size()));
    }
    if (detail::contains(metrics, Metric::Cider)) {
        std::vector<ScoringInstance> all;
        for (const auto& system : systems) {
            all.insert(all.end(), system.instances.begin(), system.instances.end());
        }
        engine.build_idf(detail::idf_documents(all));
    }

    std::vector<std::pair<std::string, std::vector<double>>> vectors;
    for (Metric metric : metrics) {
        std::vector<double> scores;
        scores.reserve(systems.size());
        for (const auto& system : systems) {
            scores.push_back(detail::system_level_score(engine, metric, system));
        }
        vectors.emplace_back(to_string(metric), std::move(scores));
    }
    const auto matrix = correlation_matrix(vectors);

    std::ostringstream out;
    detail::write_header(out, "corr-matrix", engine, metrics);
    out << "# coefficient: Spearman rho over " << systems.size() << " systems\n";
    out << "metric";
    for (const auto& [name, scores] : vectors) out << '\t' << name;
    out << '\n';
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        out << vectors[i].first;
        for (std::size_t j = 0; j < vectors.size(); ++j) {
            out << '\t' << detail::format_value(matrix[i][j]);
        }
        out << '\n';
    }
    return {out.str(), 0};
}

// Linear combination study: standalone system-level Pearson r of two
// metrics against M1 plus the r of their normalized sum, Table-V-shaped.
inline RunResult run_combine(std::span<const SystemEntry> systems, MetricEngine& engine,
                             Metric metric_a, Metric metric_b) {
    std::vector<const SystemEntry*> usable;
    std::size_t excluded = 0;
    for (const auto& system : systems) {
        if (system.m1.has_value()) {
            usable.push_back(&system);
        } else {
            ++excluded;
        }
    }
    if (usable.size() < 3) {
        throw error("combine needs at least 3 systems with M1 scores, got " +
                    std::to_string(usable.size()));
    }
    const std::array<Metric, 2> metrics = {metric_a, metric_b};
    if (detail::contains(metrics, Metric::Cider)) {
        std::vector<ScoringInstance> all;
        for (const auto* system : usable) {
            all.insert(all.end(), system->instances.begin(), system->instances.end());
        }
        engine.build_idf(detail::idf_documents(all));
    }

    std::vector<double> human;
    for (const auto* system : usable) human.push_back(*system->m1);
    auto scores_of = [&](Metric metric) {
        std::vector<double> scores;
        scores.reserve(usable.size());
        for (const auto* system : usable) {
            scores.push_back(detail::system_level_score(engine, metric, *system));
        }
        return scores;
    };
    const auto a = scores_of(metric_a);
    const auto b = scores_of(metric_b);
    const auto combined = combine_scores(a, b, engine.options().normalization);

    std::ostringstream out;
    detail::write_header(out, "combine", engine, metrics);
    out << "# normalization: " << to_string(engine.options().normalization) << "\n";
    out << "# target: M1\n";
    out << "# excluded_systems: " << excluded << "\n";
    out << "# p-values: two-tailed (Student t, n-2 dof)\n";
    out << "score\tpearson_r\tp_value\tn_systems\n";
    auto emit = [&](const std::string& label, const std::vector<double>& scores) {
        out << label << '\t';
        try {
            const CorrelationResult result = pearson({scores, human, {}});
            out << detail::format_value(result.coefficient) << '\t'
                << detail::format_p(result.p_value) << '\t' << result.n << '\n';
        } catch (const undefined_correlation_error&) {
            out << "NA\tNA\t" << usable.size() << '\n';
        }
    };
    emit(to_string(metric_a), a);
    emit(to_string(metric_b), b);
    emit(std::string(to_string(metric_a)) + "+" + to_string(metric_b), combined);
    return {out.str(), excluded};
}

} // namespace wembsim::harness
