#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wembsim/embedding_table.hpp"
#include "wembsim/error.hpp"
#include "wembsim/preprocess.hpp"

namespace wembsim {

// Mean-of-word-embeddings sentence representation. A caption that is empty
// after filtering maps to the zero vector and is flagged degenerate.
struct SentenceVector {
    std::vector<double> values;
    std::size_t source_token_count = 0;

    bool degenerate() const { return source_token_count == 0; }
};

enum class CombiningRule { Max, Mean, Min };

inline const char* to_string(CombiningRule rule) {
    switch (rule) {
        case CombiningRule::Max: return "max";
        case CombiningRule::Min: return "min";
        case CombiningRule::Mean: default: return "mean";
    }
}

struct Score {
    double value = 0.0;
    bool degenerate = false;
};

struct ScoreOptions {
    CombiningRule rule = CombiningRule::Mean;
    // Drops the absolute value from the cosine numerator (study knob); the
    // default keeps it, so scores live in [0, 1].
    bool signed_cosine = false;
};

// Component-wise mean of the token embeddings, duplicates counted with
// multiplicity. Tokens must be in-vocabulary; run the caption through
// vocabulary filtering first.
inline SentenceVector mowe(const Caption& caption, const EmbeddingTable& table) {
    SentenceVector sv;
    sv.values.assign(table.dim(), 0.0);
    for (const auto& token : caption.tokens) {
        auto row = table.lookup(token);
        if (!row) throw error("token '" + token + "' not in embedding vocabulary");
        for (std::size_t i = 0; i < table.dim(); ++i) sv.values[i] += (*row)[i];
    }
    sv.source_token_count = caption.tokens.size();
    if (!caption.tokens.empty()) {
        const double n = static_cast<double>(caption.tokens.size());
        for (double& v : sv.values) v /= n;
    }
    return sv;
}

// |a.b| / (|a||b|), clamped into [0, 1]. With signed_cosine the numerator
// keeps its sign and the result lives in [-1, 1].
inline double cosine(const SentenceVector& a, const SentenceVector& b, bool signed_cosine = false) {
    if (a.degenerate() || b.degenerate()) {
        throw degenerate_error("cosine of a degenerate sentence vector");
    }
    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        norm_a += a.values[i] * a.values[i];
        norm_b += b.values[i] * b.values[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        throw degenerate_error("cosine of a zero-norm sentence vector");
    }
    double sim = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
    if (!signed_cosine) sim = std::fabs(sim);
    return std::clamp(sim, signed_cosine ? -1.0 : 0.0, 1.0);
}

// Per-reference cosine similarities combined by the rule. Degenerate
// references are skipped; a degenerate candidate (or an all-degenerate
// reference set) yields Score{0, degenerate} instead of aborting.
inline Score wembsim_score(const Caption& candidate, std::span<const Caption> references,
                           const EmbeddingTable& table, const ScoreOptions& options = {}) {
    if (references.empty()) throw error("wembsim_score: empty reference list");

    const SentenceVector cand = mowe(candidate, table);
    if (cand.degenerate()) return {0.0, true};

    double best_max = 0.0, best_min = 0.0, sum = 0.0;
    std::size_t used = 0;
    for (const auto& reference : references) {
        const SentenceVector ref = mowe(reference, table);
        if (ref.degenerate()) continue;
        double sim;
        try {
            sim = cosine(cand, ref, options.signed_cosine);
        } catch (const degenerate_error&) {
            continue; // zero-norm reference vector
        }
        if (used == 0) {
            best_max = best_min = sim;
        } else {
            best_max = std::max(best_max, sim);
            best_min = std::min(best_min, sim);
        }
        sum += sim;
        ++used;
    }
    if (used == 0) return {0.0, true};

    switch (options.rule) {
        case CombiningRule::Max: return {best_max, false};
        case CombiningRule::Min: return {best_min, false};
        case CombiningRule::Mean: default: return {sum / static_cast<double>(used), false};
    }
}

inline Score wembsim_score(const Caption& candidate, std::span<const Caption> references,
                           const EmbeddingTable& table, CombiningRule rule) {
    return wembsim_score(candidate, references, table, ScoreOptions{rule, false});
}

struct BatchItem {
    Caption candidate;
    std::vector<Caption> references;
};

struct BatchResult {
    Score score;
    bool failed = false;
    std::string error_message;
};

// Element-wise wembsim_score; per-item errors become failure records rather
// than aborting the batch. Output order matches input order.
inline std::vector<BatchResult> batch_score(std::span<const BatchItem> items,
                                            const EmbeddingTable& table,
                                            const ScoreOptions& options = {}) {
    std::vector<BatchResult> results;
    results.reserve(items.size());
    for (const auto& item : items) {
        BatchResult result;
        try {
            result.score = wembsim_score(item.candidate, item.references, table, options);
        } catch (const std::exception& ex) {
            result.failed = true;
            result.error_message = ex.what();
        }
        results.push_back(std::move(result));
    }
    return results;
}

} // namespace wembsim
