#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wembsim/embedding_table.hpp"
#include "wembsim/error.hpp"
#include "wembsim/preprocess.hpp"

namespace wembsim {

// Discrete transport instance: nBOW marginals over the two captions'
// distinct words and a row-major matrix of pairwise embedding distances.
struct TransportProblem {
    std::vector<double> source_weights; // sums to 1
    std::vector<double> target_weights; // sums to 1
    std::vector<double> cost;           // rows() x cols(), nonnegative
    std::size_t rows() const { return source_weights.size(); }
    std::size_t cols() const { return target_weights.size(); }

    double cost_at(std::size_t i, std::size_t j) const { return cost[i * cols() + j]; }

    void validate() const {
        if (source_weights.empty() || target_weights.empty()) {
            throw degenerate_error("transport problem with an empty side");
        }
        if (cost.size() != rows() * cols()) throw error("cost matrix has wrong shape");
        double sa = 0.0, sb = 0.0;
        for (double w : source_weights) {
            if (w < 0.0) throw error("negative source weight");
            sa += w;
        }
        for (double w : target_weights) {
            if (w < 0.0) throw error("negative target weight");
            sb += w;
        }
        if (std::fabs(sa - 1.0) > 1e-9 || std::fabs(sb - 1.0) > 1e-9) {
            throw error("transport weights must sum to 1");
        }
        for (double c : cost) {
            if (c < 0.0 || !std::isfinite(c)) throw error("cost entries must be finite and nonnegative");
        }
    }

    double mean_cost() const {
        double sum = 0.0;
        for (double c : cost) sum += c;
        return cost.empty() ? 0.0 : sum / static_cast<double>(cost.size());
    }
};

struct SinkhornResult {
    double cost = 0.0;     // <P, C> of the final plan
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> plan; // rows() x cols(), row-major
};

struct WmdParams {
    double epsilon_scale = 0.05; // epsilon = scale x mean(cost)
    std::size_t max_iter = 1000;
    double tol = 1e-6;
};

namespace detail {

inline double logsumexp(std::span<const double> values) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    if (!std::isfinite(m)) return m; // all -inf (or a NaN, caught later)
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - m);
    return m + std::log(sum);
}

} // namespace detail

// Log-domain Sinkhorn iterations for the entropically regularized transport
// problem. Converged means the plan's marginal violation dropped below tol
// (max over both marginals, L-infinity) within max_iter sweeps.
inline SinkhornResult wmd_sinkhorn(const TransportProblem& problem, double epsilon,
                                   std::size_t max_iter = 1000, double tol = 1e-6) {
    problem.validate();
    if (!(epsilon > 0.0)) throw error("sinkhorn epsilon must be positive");

    const std::size_t m = problem.rows();
    const std::size_t n = problem.cols();
    const double neg_inf = -std::numeric_limits<double>::infinity();

    std::vector<double> log_a(m), log_b(n);
    for (std::size_t i = 0; i < m; ++i) {
        log_a[i] = problem.source_weights[i] > 0.0 ? std::log(problem.source_weights[i]) : neg_inf;
    }
    for (std::size_t j = 0; j < n; ++j) {
        log_b[j] = problem.target_weights[j] > 0.0 ? std::log(problem.target_weights[j]) : neg_inf;
    }

    std::vector<double> f(m, 0.0), g(n, 0.0);
    std::vector<double> scratch(std::max(m, n));
    SinkhornResult result;
    result.plan.assign(m * n, 0.0);

    auto fail = [&](const char* stage) {
        throw numerical_error(std::string("sinkhorn produced a non-finite ") + stage +
                              "; epsilon is too small for the cost scale, increase it");
    };

    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        // f_i <- eps log a_i - eps lse_j((g_j - C_ij) / eps)
        for (std::size_t i = 0; i < m; ++i) {
            if (log_a[i] == neg_inf) {
                f[i] = neg_inf;
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                scratch[j] = (g[j] - problem.cost_at(i, j)) / epsilon;
            }
            f[i] = epsilon * log_a[i] - epsilon * detail::logsumexp({scratch.data(), n});
            if (std::isnan(f[i]) || f[i] == std::numeric_limits<double>::infinity()) fail("potential");
        }
        // g_j <- eps log b_j - eps lse_i((f_i - C_ij) / eps)
        for (std::size_t j = 0; j < n; ++j) {
            if (log_b[j] == neg_inf) {
                g[j] = neg_inf;
                continue;
            }
            for (std::size_t i = 0; i < m; ++i) {
                scratch[i] = (f[i] - problem.cost_at(i, j)) / epsilon;
            }
            g[j] = epsilon * log_b[j] - epsilon * detail::logsumexp({scratch.data(), m});
            if (std::isnan(g[j]) || g[j] == std::numeric_limits<double>::infinity()) fail("potential");
        }

        double violation = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double row_sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double e = (f[i] + g[j] - problem.cost_at(i, j)) / epsilon;
                const double p = (f[i] == neg_inf || g[j] == neg_inf) ? 0.0 : std::exp(e);
                result.plan[i * n + j] = p;
                row_sum += p;
            }
            violation = std::max(violation, std::fabs(row_sum - problem.source_weights[i]));
        }
        for (std::size_t j = 0; j < n; ++j) {
            double col_sum = 0.0;
            for (std::size_t i = 0; i < m; ++i) col_sum += result.plan[i * n + j];
            violation = std::max(violation, std::fabs(col_sum - problem.target_weights[j]));
        }

        result.iterations = iter;
        if (violation < tol) {
            result.converged = true;
            break;
        }
    }

    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = result.plan[i * n + j];
            if (p > 0.0) cost += p * problem.cost_at(i, j);
        }
    }
    if (!std::isfinite(cost)) fail("cost");
    result.cost = cost;
    return result;
}

// nBOW transport problem between two captions: distinct words in first-seen
// order, weights = multiplicity / length, Euclidean embedding distances.
inline TransportProblem make_transport_problem(const Caption& candidate, const Caption& reference,
                                               const EmbeddingTable& table) {
    if (candidate.tokens.empty() || reference.tokens.empty()) {
        throw degenerate_error("transport problem of a degenerate caption");
    }

    auto distinct = [](const std::vector<std::string>& tokens) {
        std::vector<std::string> words;
        std::vector<double> weights;
        for (const auto& token : tokens) {
            auto it = std::find(words.begin(), words.end(), token);
            if (it == words.end()) {
                words.push_back(token);
                weights.push_back(1.0);
            } else {
                weights[static_cast<std::size_t>(it - words.begin())] += 1.0;
            }
        }
        const double n = static_cast<double>(tokens.size());
        for (double& w : weights) w /= n;
        return std::pair{words, weights};
    };

    auto [src_words, src_weights] = distinct(candidate.tokens);
    auto [dst_words, dst_weights] = distinct(reference.tokens);

    auto embedding = [&](const std::string& word) {
        auto row = table.lookup(word);
        if (!row) throw error("token '" + word + "' not in embedding vocabulary");
        return *row;
    };

    TransportProblem problem;
    problem.source_weights = std::move(src_weights);
    problem.target_weights = std::move(dst_weights);
    problem.cost.resize(src_words.size() * dst_words.size());
    for (std::size_t i = 0; i < src_words.size(); ++i) {
        const auto a = embedding(src_words[i]);
        for (std::size_t j = 0; j < dst_words.size(); ++j) {
            const auto b = embedding(dst_words[j]);
            double sum = 0.0;
            for (std::size_t k = 0; k < table.dim(); ++k) {
                const double d = a[k] - b[k];
                sum += d * d;
            }
            problem.cost[i * dst_words.size() + j] = std::sqrt(sum);
        }
    }
    return problem;
}

// exp(-transport cost): maps the word-mover distance onto (0, 1] so the
// harness can treat every metric as higher-is-better.
inline double wmd_similarity(const Caption& candidate, const Caption& reference,
                             const EmbeddingTable& table, const WmdParams& params = {}) {
    const TransportProblem problem = make_transport_problem(candidate, reference, table);
    const double mean = problem.mean_cost();
    if (mean == 0.0) return 1.0; // every feasible plan costs zero
    const SinkhornResult result =
        wmd_sinkhorn(problem, params.epsilon_scale * mean, params.max_iter, params.tol);
    return std::exp(-result.cost);
}

} // namespace wembsim
