#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wembsim/embedding_table.hpp"
#include "wembsim/error.hpp"
#include "wembsim/preprocess.hpp"
#include "wembsim/score.hpp"

namespace wembsim {

// n-gram multiset of one sentence; keys are space-joined token runs.
struct NGramCounts {
    int order = 1;
    std::unordered_map<std::string, int> counts;
};

inline NGramCounts count_ngrams(std::span<const std::string> tokens, int order) {
    NGramCounts result;
    result.order = order;
    if (order <= 0 || tokens.size() < static_cast<std::size_t>(order)) return result;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < order; ++j) {
            key += ' ';
            key += tokens[i + j];
        }
        ++result.counts[key];
    }
    return result;
}

// Sentence-level BLEU with n = 1..4: modified precisions clipped against the
// maximum reference count, geometric mean with epsilon smoothing on zero
// precisions, brevity penalty against the closest reference length (ties go
// to the shorter reference).
inline double bleu4(const Caption& candidate, std::span<const Caption> references,
                    double smoothing_epsilon = 1e-9) {
    if (references.empty()) throw error("bleu4: empty reference list");
    if (candidate.tokens.empty()) return 0.0;

    const std::size_t cand_len = candidate.tokens.size();
    std::size_t closest_ref_len = references[0].tokens.size();
    for (const auto& reference : references) {
        const std::size_t len = reference.tokens.size();
        const auto diff = [&](std::size_t r) {
            return r > cand_len ? r - cand_len : cand_len - r;
        };
        if (diff(len) < diff(closest_ref_len) ||
            (diff(len) == diff(closest_ref_len) && len < closest_ref_len)) {
            closest_ref_len = len;
        }
    }

    double log_precision_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const NGramCounts cand_counts = count_ngrams(candidate.tokens, n);
        std::unordered_map<std::string, int> max_ref_counts;
        for (const auto& reference : references) {
            for (const auto& [gram, count] : count_ngrams(reference.tokens, n).counts) {
                auto& best = max_ref_counts[gram];
                best = std::max(best, count);
            }
        }
        long long matches = 0, total = 0;
        for (const auto& [gram, count] : cand_counts.counts) {
            total += count;
            auto it = max_ref_counts.find(gram);
            if (it != max_ref_counts.end()) matches += std::min(count, it->second);
        }
        double precision = total > 0 ? static_cast<double>(matches) / static_cast<double>(total) : 0.0;
        if (precision == 0.0) precision = smoothing_epsilon;
        log_precision_sum += std::log(precision);
    }

    const double brevity_penalty =
        cand_len >= closest_ref_len
            ? 1.0
            : std::exp(1.0 - static_cast<double>(closest_ref_len) / static_cast<double>(cand_len));
    return brevity_penalty * std::exp(log_precision_sum / 4.0);
}

namespace detail {

inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

} // namespace detail

// Longest-common-subsequence F-measure with beta = 1.2, maximised over the
// references (the COCO evaluation convention).
inline double rouge_l(const Caption& candidate, std::span<const Caption> references,
                      double beta = 1.2) {
    if (references.empty()) throw error("rouge_l: empty reference list");
    if (candidate.tokens.empty()) return 0.0;

    double best = 0.0;
    for (const auto& reference : references) {
        if (reference.tokens.empty()) continue;
        const auto lcs = static_cast<double>(detail::lcs_length(candidate.tokens, reference.tokens));
        if (lcs == 0.0) continue;
        const double recall = lcs / static_cast<double>(reference.tokens.size());
        const double precision = lcs / static_cast<double>(candidate.tokens.size());
        const double f = (1.0 + beta * beta) * recall * precision / (recall + beta * beta * precision);
        best = std::max(best, f);
    }
    return best;
}

// Document frequencies of n-grams over a reference corpus, one document per
// image. Unseen n-grams fall back to df = 1, i.e. idf = log(doc_count).
struct IdfTable {
    int order = 1;
    std::size_t doc_count = 0;
    std::unordered_map<std::string, std::size_t> df;

    double idf(const std::string& gram) const {
        auto it = df.find(gram);
        const double f = it == df.end() ? 1.0 : static_cast<double>(it->second);
        return std::log(static_cast<double>(doc_count) / f);
    }
};

using CiderIdf = std::array<IdfTable, 4>;

inline CiderIdf cider_build_idf(std::span<const std::vector<Caption>> corpus) {
    if (corpus.size() < 2) {
        throw error("cider_build_idf: need at least 2 images, got " + std::to_string(corpus.size()));
    }
    CiderIdf idf;
    for (int n = 1; n <= 4; ++n) {
        IdfTable& table = idf[n - 1];
        table.order = n;
        table.doc_count = corpus.size();
        for (const auto& references : corpus) {
            std::unordered_map<std::string, int> seen;
            for (const auto& reference : references) {
                for (const auto& [gram, count] : count_ngrams(reference.tokens, n).counts) {
                    seen.emplace(gram, 1);
                }
            }
            for (const auto& entry : seen) ++table.df[entry.first];
        }
    }
    return idf;
}

struct MetricValue {
    double value = 0.0;
    bool degenerate = false;
};

namespace detail {

using TfIdfVector = std::unordered_map<std::string, double>;

inline TfIdfVector tfidf_vector(std::span<const std::string> tokens, const IdfTable& idf) {
    TfIdfVector vec;
    const NGramCounts counts = count_ngrams(tokens, idf.order);
    double total = 0.0;
    for (const auto& [gram, count] : counts.counts) total += count;
    if (total == 0.0) return vec;
    for (const auto& [gram, count] : counts.counts) {
        vec[gram] = (static_cast<double>(count) / total) * idf.idf(gram);
    }
    return vec;
}

inline double tfidf_norm(const TfIdfVector& vec) {
    double sum = 0.0;
    for (const auto& [gram, w] : vec) sum += w * w;
    return std::sqrt(sum);
}

} // namespace detail

// Plain CIDEr (no Gaussian length penalty): per n, tf-idf cosine against each
// reference with candidate weights clipped to the reference's, averaged over
// references, averaged over n = 1..4, scaled by 10.
inline MetricValue cider(const Caption& candidate, std::span<const Caption> references,
                         const CiderIdf& idf) {
    if (references.empty()) throw error("cider: empty reference list");

    bool candidate_has_weight = false;
    double total = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const auto cand_vec = detail::tfidf_vector(candidate.tokens, idf[n - 1]);
        const double cand_norm = detail::tfidf_norm(cand_vec);
        if (cand_norm > 0.0) candidate_has_weight = true;

        double per_ref_sum = 0.0;
        for (const auto& reference : references) {
            const auto ref_vec = detail::tfidf_vector(reference.tokens, idf[n - 1]);
            const double ref_norm = detail::tfidf_norm(ref_vec);
            if (cand_norm == 0.0 || ref_norm == 0.0) continue;
            double dot = 0.0;
            for (const auto& [gram, w] : cand_vec) {
                auto it = ref_vec.find(gram);
                if (it != ref_vec.end()) dot += std::min(w, it->second) * it->second;
            }
            per_ref_sum += dot / (cand_norm * ref_norm);
        }
        total += per_ref_sum / static_cast<double>(references.size());
    }

    if (!candidate_has_weight) return {0.0, true};
    return {10.0 * total / 4.0, false};
}

// Euclidean distance between the captions' mean embeddings (nBOW-weighted
// centroids; multiplicity is already what the mean does).
inline double wcd(const Caption& candidate, const Caption& reference, const EmbeddingTable& table) {
    const SentenceVector a = mowe(candidate, table);
    const SentenceVector b = mowe(reference, table);
    if (a.degenerate() || b.degenerate()) {
        throw degenerate_error("wcd of a degenerate caption");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

} // namespace wembsim
