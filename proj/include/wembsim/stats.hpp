#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wembsim/error.hpp"

namespace wembsim {

struct PairedSamples {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::string> labels; // optional system identifiers

    std::size_t size() const { return xs.size(); }
};

struct CorrelationResult {
    double coefficient = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

namespace detail {

// Continued-fraction evaluation of the regularized incomplete beta function
// (Lentz's method, 1e-12 termination).
inline double betacf(double a, double b, double x) {
    constexpr double eps = 1e-12;
    constexpr double fpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw numerical_error("incomplete beta continued fraction did not converge");
}

} // namespace detail

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw error("incomplete beta argument outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(log_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * detail::betacf(a, b, x) / a;
    }
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-tailed Student-t tail probability: P(|T_dof| > t) = I_x(dof/2, 1/2)
// with x = dof / (dof + t^2).
inline double student_t_two_tailed_p(double t, double dof) {
    if (dof <= 0.0) throw error("student t needs positive degrees of freedom");
    const double x = dof / (dof + t * t);
    return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

// p-value of a sample correlation r at sample size n, via the exact
// transform t = r sqrt((n-2) / (1-r^2)).
inline double correlation_p_value(double r, std::size_t n) {
    if (n < 3) throw error("correlation p-value needs n >= 3");
    // |r| within floating-point noise of 1 lands on the r = +-1 branch
    if (std::fabs(r) >= 1.0 || 1.0 - r * r < 1e-15) return 0.0;
    const double dof = static_cast<double>(n - 2);
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    return student_t_two_tailed_p(std::fabs(t), dof);
}

namespace detail {

inline void check_samples(const PairedSamples& samples) {
    if (samples.xs.size() != samples.ys.size()) throw error("paired samples of unequal length");
    if (samples.size() < 3) throw error("correlation needs at least 3 samples");
    for (double v : samples.xs) {
        if (!std::isfinite(v)) throw error("non-finite sample value");
    }
    for (double v : samples.ys) {
        if (!std::isfinite(v)) throw error("non-finite sample value");
    }
}

inline double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw undefined_correlation_error("correlation of a zero-variance sample");
    }
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

// Average ranks, ties get the mean of the positions they occupy.
inline std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

inline CorrelationResult pearson(const PairedSamples& samples) {
    detail::check_samples(samples);
    const double r = detail::pearson_r(samples.xs, samples.ys);
    return {r, correlation_p_value(r, samples.size()), samples.size()};
}

inline CorrelationResult spearman(const PairedSamples& samples) {
    detail::check_samples(samples);
    const auto rank_x = detail::average_ranks(samples.xs);
    const auto rank_y = detail::average_ranks(samples.ys);
    const double rho = detail::pearson_r(rank_x, rank_y);
    return {rho, correlation_p_value(rho, samples.size()), samples.size()};
}

struct PreferencePair {
    double score_a = 0.0;
    double score_b = 0.0;
    enum class Choice { A, B } human_prefers = Choice::A;
};

struct AccuracyResult {
    double accuracy = 0.0;
    std::size_t correct = 0;
    std::size_t ties = 0;
    std::size_t total = 0;
};

// A pair counts as correct only when the metric strictly prefers the
// human-preferred caption; exact ties are incorrect and tallied.
inline AccuracyResult pairwise_accuracy(std::span<const PreferencePair> pairs) {
    AccuracyResult result;
    result.total = pairs.size();
    for (const auto& pair : pairs) {
        if (pair.score_a == pair.score_b) {
            ++result.ties;
            continue;
        }
        const bool metric_prefers_a = pair.score_a > pair.score_b;
        if (metric_prefers_a == (pair.human_prefers == PreferencePair::Choice::A)) {
            ++result.correct;
        }
    }
    result.accuracy = result.total == 0
                          ? 0.0
                          : static_cast<double>(result.correct) / static_cast<double>(result.total);
    return result;
}

// Forced choice: the correct caption must strictly outscore the distractor.
inline AccuracyResult forced_choice_accuracy(std::span<const std::pair<double, double>> instances) {
    AccuracyResult result;
    result.total = instances.size();
    for (const auto& [score_correct, score_distractor] : instances) {
        if (score_correct == score_distractor) {
            ++result.ties;
        } else if (score_correct > score_distractor) {
            ++result.correct;
        }
    }
    result.accuracy = result.total == 0
                          ? 0.0
                          : static_cast<double>(result.correct) / static_cast<double>(result.total);
    return result;
}

// Pairwise Spearman rho between metric score vectors. Undefined cells
// (zero-variance vectors) carry NaN as the missing-value marker; the
// diagonal is pinned to 1.
inline std::vector<std::vector<double>> correlation_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& metric_scores) {
    const std::size_t k = metric_scores.size();
    std::vector<std::vector<double>> matrix(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) {
                matrix[i][j] = 1.0;
                continue;
            }
            try {
                PairedSamples samples{metric_scores[i].second, metric_scores[j].second, {}};
                matrix[i][j] = spearman(samples).coefficient;
            } catch (const undefined_correlation_error&) {
                matrix[i][j] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return matrix;
}

enum class Normalization { MinMax, ZScore, None };

inline const char* to_string(Normalization norm) {
    switch (norm) {
        case Normalization::MinMax: return "minmax";
        case Normalization::ZScore: return "zscore";
        case Normalization::None: default: return "none";
    }
}

namespace detail {

inline std::vector<double> normalize(std::span<const double> values, Normalization mode) {
    std::vector<double> out(values.begin(), values.end());
    if (mode == Normalization::None || values.empty()) return out;
    if (mode == Normalization::MinMax) {
        const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
        if (*lo == *hi) throw error("minmax normalization of a constant vector");
        const double span = *hi - *lo;
        const double base = *lo;
        for (double& v : out) v = (v - base) / span;
        return out;
    }
    // z-score with the population standard deviation
    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (double v : out) var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.size());
    if (var == 0.0) throw error("zscore normalization of a constant vector");
    const double sd = std::sqrt(var);
    for (double& v : out) v = (v - mean) / sd;
    return out;
}

} // namespace detail

// Normalize each vector independently, then element-wise unweighted sum.
inline std::vector<double> combine_scores(std::span<const double> a, std::span<const double> b,
                                          Normalization mode) {
    if (a.size() != b.size()) throw error("combine_scores: vectors of unequal length");
    const auto na = detail::normalize(a, mode);
    const auto nb = detail::normalize(b, mode);
    std::vector<double> combined(na.size());
    for (std::size_t i = 0; i < na.size(); ++i) combined[i] = na[i] + nb[i];
    return combined;
}

} // namespace wembsim
