#pragma once

// Statistical oracle suite: every estimator claim (unbiasedness, variance
// decomposition and optimality, clipped second-moment cap, finite-clip bias
// bound) becomes an executable check with a confidence interval, plus the
// sampling-probability / gradient-norm correlation tracker.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zo/bandit.hpp"
#include "zo/errors.hpp"
#include "zo/estimator.hpp"
#include "zo/objectives.hpp"
#include "zo/optimizer.hpp"
#include "zo/params.hpp"
#include "zo/rng.hpp"

namespace zo {

struct ValidationReport {
    std::string claim_id;
    double bound = 0.0;    // theoretical value (equality claims) or upper bound
    double estimate = 0.0; // empirical or analytic measured value
    double se = 0.0;       // standard error of the estimate, 0 for analytic paths
    std::size_t n_trials = 0;
    bool pass = false;
    double variance_sigma2 = std::numeric_limits<double>::quiet_NaN();
};

// Tolerance policy: analytic-vs-analytic at absolute 1e-12, Monte Carlo vs
// analytic at 4 standard errors, Monte Carlo vs Monte Carlo at 5% relative.
constexpr double kAnalyticTol = 1e-12;
constexpr double kMcSigmas = 4.0;
constexpr double kMcRelTol = 0.05;

inline bool pass_analytic(double a, double b) { return std::abs(a - b) <= kAnalyticTol; }
inline bool pass_mc_vs_analytic(double estimate, double target, double se) {
    return std::abs(estimate - target) <= kMcSigmas * se;
}
inline bool pass_mc_relative(double estimate, double target) {
    return std::abs(estimate - target) <= kMcRelTol * std::abs(target);
}

// Deterministic pairwise-summation reduce: sequential block partials, then a
// pairwise tree over the partials. Result does not depend on thread count.
class PairwiseAccumulator {
public:
    void add(double v) {
        block_ += v;
        if (++filled_ == kBlock) {
            partials_.push_back(block_);
            block_ = 0.0;
            filled_ = 0;
        }
    }

    double total() const {
        std::vector<double> work = partials_;
        if (filled_ > 0) work.push_back(block_);
        if (work.empty()) return 0.0;
        while (work.size() > 1) {
            std::size_t half = 0;
            for (std::size_t i = 0; i + 1 < work.size(); i += 2) {
                work[half++] = work[i] + work[i + 1];
            }
            if (work.size() % 2 == 1) {
                work[half++] = work.back();
            }
            work.resize(half);
        }
        return work[0];
    }

private:
    static constexpr std::size_t kBlock = 1024;
    std::vector<double> partials_;
    double block_ = 0.0;
    std::size_t filled_ = 0;
};

// Pearson correlation; empty when either input has zero variance (the
// coefficient is undefined there, which is distinct from zero).
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw dimension_error("pearson: length mismatch");
    }
    const std::size_t n = a.size();
    if (n < 2) return std::nullopt;
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return std::nullopt;
    return cov / std::sqrt(var_a * var_b);
}

// ---------------------------------------------------------------------------
// Closed forms for the sampling estimator, conditional on the probe noise.
// v_l is the squared magnitude of the dense ZO gradient on layer l.
// ---------------------------------------------------------------------------

// E[w~ * N] = min(1, C K p): the selection factor the conditional mean of the
// assembled estimator carries per layer.
inline double analytic_selection_factor(std::size_t k, double p, double clip_c) {
    return std::min(1.0, clip_c * static_cast<double>(k) * p);
}

// Var(g_Ada | z) = (1/K) sum_l v_l (1/p_l - 1), unclipped weights.
inline double variance_formula(std::span<const double> v, std::span<const double> p,
                               std::size_t k) {
    if (v.size() != p.size()) {
        throw dimension_error("variance_formula: v and p differ in length");
    }
    double total = 0.0;
    for (std::size_t l = 0; l < v.size(); ++l) {
        total += v[l] * (1.0 / p[l] - 1.0);
    }
    return total / static_cast<double>(k);
}

// The variance-minimizing distribution p* with p*_l proportional to sqrt(v_l).
inline std::vector<double> optimal_probs(std::span<const double> v) {
    std::vector<double> p(v.size());
    double norm = 0.0;
    for (std::size_t l = 0; l < v.size(); ++l) {
        p[l] = std::sqrt(v[l]);
        norm += p[l];
    }
    if (norm == 0.0) {
        throw domain_error("optimal_probs: all-zero v");
    }
    for (double& x : p) x /= norm;
    return p;
}

// Cauchy-Schwarz closed form of the variance at p*: (1/K)[(sum sqrt v)^2 - sum v].
inline double optimal_variance(std::span<const double> v, std::size_t k) {
    double root_sum = 0.0, sum = 0.0;
    for (double x : v) {
        root_sum += std::sqrt(x);
        sum += x;
    }
    return (root_sum * root_sum - sum) / static_cast<double>(k);
}

// Second-moment multiplier M = w~^2 E[N^2] with the exact Binomial moment
// E[N^2] = K p (1-p) + K^2 p^2; bounded by C + 1 for every p.
inline double second_moment_multiplier(std::size_t k, double p, double clip_c) {
    const double kd = static_cast<double>(k);
    const double w = std::min(1.0 / (kd * p), clip_c);
    const double second = kd * p * (1.0 - p) + kd * kd * p * p;
    return w * w * second;
}

// Exact E||g~||^2 = sum_l M_l v_l.
inline double exact_second_moment(std::span<const double> v, std::span<const double> p,
                                  std::size_t k, double clip_c) {
    double total = 0.0;
    for (std::size_t l = 0; l < v.size(); ++l) {
        total += second_moment_multiplier(k, p[l], clip_c) * v[l];
    }
    return total;
}

// ||E[g~] - g_ZO|| with per-layer gradient norms g: each clipped layer keeps
// the fraction min(1, C K p) of its mean, so the bias is exactly
// (1 - min(1, C K p_l)) g_l per layer.
inline double analytic_bias_norm(std::span<const double> layer_grad_norms,
                                 std::span<const double> p, std::size_t k, double clip_c) {
    double total = 0.0;
    for (std::size_t l = 0; l < p.size(); ++l) {
        const double miss = 1.0 - analytic_selection_factor(k, p[l], clip_c);
        total += miss * miss * layer_grad_norms[l] * layer_grad_norms[l];
    }
    return std::sqrt(total);
}

// G * sum over clipped layers of (1 - C K p_l): the proposition's bound.
inline double bias_bound_value(std::span<const double> p, std::size_t k, double clip_c,
                               double grad_bound_G) {
    double total = 0.0;
    for (double pl : p) {
        const double ckp = clip_c * static_cast<double>(k) * pl;
        if (ckp < 1.0) {
            total += 1.0 - ckp;
        }
    }
    return grad_bound_G * total;
}

// ---------------------------------------------------------------------------
// Monte Carlo checks
// ---------------------------------------------------------------------------

// Two-level Monte Carlo for unbiasedness: outer over the probe noise z,
// inner over the sampling draws S. Compares the mean assembled sparse
// gradient against the analytic gradient coordinate-wise (exact reference
// for quadratics, where the smoothed gradient equals the gradient).
inline ValidationReport check_unbiasedness(const OracleObjective& obj, const LayeredParams& params,
                                           double mu, const BanditConfig& cfg, std::size_t n_z,
                                           std::size_t n_s, std::uint64_t seed) {
    cfg.validate();
    const std::size_t layers = obj.layer_count();
    const std::size_t d = obj.total_dim();

    // fixed sampling distribution from a seeded Q through the policy
    std::vector<double> q(layers);
    GaussianStream qs(derive_seed(seed, 0, SeedPurpose::data));
    for (std::size_t l = 0; l < layers; ++l) {
        q[l] = std::abs(qs.at(l));
    }
    const std::vector<double> p = sampling_probs(q, cfg);
    const std::size_t k = draw_count(cfg.rho, layers);

    const LayeredParams reference = obj.oracle_grad(params);
    std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
    std::vector<std::size_t> all(layers);
    for (std::size_t l = 0; l < layers; ++l) all[l] = l;
    LayeredParams probe = params;
    std::vector<double> factor_mean(layers);
    for (std::size_t i = 0; i < n_z; ++i) {
        const NoiseStream stream{derive_seed(seed, i + 1, SeedPurpose::noise)};
        std::copy(params.flat().begin(), params.flat().end(), probe.flat().begin());
        perturb_layers(probe, all, mu, stream);
        const double loss_plus = obj.loss(probe);
        perturb_layers(probe, all, -2.0 * mu, stream);
        const double loss_minus = obj.loss(probe);
        const double scalar = (loss_plus - loss_minus) / (2.0 * mu);

        // inner mean of w_l * n_l per layer over the sampling draws
        CounterRng rng(derive_seed(seed, i + 1, SeedPurpose::sample));
        std::fill(factor_mean.begin(), factor_mean.end(), 0.0);
        for (std::size_t s = 0; s < n_s; ++s) {
            const SampleDraw draw = multinomial_draw(p, k, rng);
            for (std::size_t l : draw.active) {
                factor_mean[l] += ipw_weight(k, p[l], cfg.clip_c) * draw.counts[l];
            }
        }
        for (double& f : factor_mean) f /= static_cast<double>(n_s);

        std::size_t j = 0;
        for (std::size_t l = 0; l < layers; ++l) {
            const auto stream_l = stream.layer_stream(l);
            const std::size_t len = obj.layer_sizes()[l];
            for (std::size_t t = 0; t < len; ++t, ++j) {
                const double x = scalar * factor_mean[l] * stream_l.at(t);
                sum[j] += x;
                sum_sq[j] += x * x;
            }
        }
    }

    const auto ref = reference.flat();
    double worst_ratio = 0.0;
    double worst_se = 0.0;
    const double n = static_cast<double>(n_z);
    for (std::size_t j = 0; j < d; ++j) {
        const double mean = sum[j] / n;
        const double var = std::max(0.0, (sum_sq[j] - n * mean * mean) / (n - 1.0));
        const double se = std::sqrt(var / n);
        const double ratio = se > 0.0 ? std::abs(mean - ref[j]) / se
                                      : (mean == ref[j] ? 0.0 : std::numeric_limits<double>::infinity());
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_se = se;
        }
    }

    ValidationReport report;
    report.claim_id = "unbiasedness_full";
    report.bound = kMcSigmas;
    report.estimate = worst_ratio; // max coordinate-wise |delta| / SE
    report.se = worst_se;
    report.n_trials = n_z * n_s;
    report.pass = worst_ratio <= kMcSigmas;
    return report;
}

// Conditional variant: z fixed, Monte Carlo over the sampling draws only.
// The mean must converge to the dense ZO gradient coordinate-wise.
inline ValidationReport check_unbiasedness_conditional(const OracleObjective& obj,
                                                       const LayeredParams& params, double mu,
                                                       const BanditConfig& cfg, std::size_t n_s,
                                                       std::uint64_t seed) {
    cfg.validate();
    const std::size_t layers = obj.layer_count();
    std::vector<double> q(layers);
    GaussianStream qs(derive_seed(seed, 0, SeedPurpose::data));
    for (std::size_t l = 0; l < layers; ++l) {
        q[l] = std::abs(qs.at(l));
    }
    const std::vector<double> p = sampling_probs(q, cfg);
    const std::size_t k = draw_count(cfg.rho, layers);

    const NoiseStream stream{derive_seed(seed, 1, SeedPurpose::noise)};
    LayeredParams probe = params;
    std::vector<std::size_t> all(layers);
    for (std::size_t l = 0; l < layers; ++l) all[l] = l;
    perturb_layers(probe, all, mu, stream);
    const double loss_plus = obj.loss(probe);
    perturb_layers(probe, all, -2.0 * mu, stream);
    const double loss_minus = obj.loss(probe);
    const double scalar = (loss_plus - loss_minus) / (2.0 * mu);

    CounterRng rng(derive_seed(seed, 1, SeedPurpose::sample));
    std::vector<double> factor_sum(layers, 0.0), factor_sq(layers, 0.0);
    for (std::size_t s = 0; s < n_s; ++s) {
        const SampleDraw draw = multinomial_draw(p, k, rng);
        for (std::size_t l : draw.active) {
            const double f = ipw_weight(k, p[l], cfg.clip_c) * draw.counts[l];
            factor_sum[l] += f;
            factor_sq[l] += f * f;
        }
    }

    // Compare the per-layer selection factor against its exact mean; the
    // gradient coordinates share it within a layer.
    double worst_ratio = 0.0;
    double worst_se = 0.0;
    const double n = static_cast<double>(n_s);
    for (std::size_t l = 0; l < layers; ++l) {
        const double mean = factor_sum[l] / n;
        const double target = analytic_selection_factor(k, p[l], cfg.clip_c);
        const double var = std::max(0.0, (factor_sq[l] - n * mean * mean) / (n - 1.0));
        const double se = std::sqrt(var / n);
        const double ratio = se > 0.0 ? std::abs(mean - target) / se
                                      : (mean == target ? 0.0 : std::numeric_limits<double>::infinity());
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_se = se;
        }
    }

    ValidationReport report;
    report.claim_id = "unbiasedness_conditional";
    report.bound = kMcSigmas;
    report.estimate = worst_ratio;
    report.se = worst_se;
    report.n_trials = n_s;
    report.pass = worst_ratio <= kMcSigmas;
    report.variance_sigma2 = scalar * scalar; // recorded probe magnitude
    return report;
}

// Empirical conditional variance against the closed form.
inline ValidationReport check_variance(std::span<const double> v, std::span<const double> p,
                                       std::size_t k, std::size_t n_trials, std::uint64_t seed) {
    const double target = variance_formula(v, p, k);
    CounterRng rng(derive_seed(seed, 0, SeedPurpose::sample));
    PairwiseAccumulator acc, acc_sq;
    for (std::size_t t = 0; t < n_trials; ++t) {
        const SampleDraw draw = multinomial_draw(p, k, rng);
        double s = 0.0;
        for (std::size_t l = 0; l < p.size(); ++l) {
            const double dev = static_cast<double>(draw.counts[l]) /
                                   (static_cast<double>(k) * p[l]) -
                               1.0;
            s += v[l] * dev * dev;
        }
        acc.add(s);
        acc_sq.add(s * s);
    }
    const double n = static_cast<double>(n_trials);
    const double mean = acc.total() / n;
    const double var = std::max(0.0, (acc_sq.total() - n * mean * mean) / (n - 1.0));

    ValidationReport report;
    report.claim_id = "variance_formula";
    report.bound = target;
    report.estimate = mean;
    report.se = std::sqrt(var / n);
    report.n_trials = n_trials;
    report.pass = pass_mc_relative(mean, target);
    report.variance_sigma2 = mean;
    return report;
}

// Empirical second moment against the (C + 1) cap.
inline ValidationReport check_second_moment(std::span<const double> v, std::span<const double> p,
                                            std::size_t k, double clip_c, std::size_t n_trials,
                                            std::uint64_t seed) {
    double cap = 0.0;
    for (double x : v) cap += x;
    cap *= clip_c + 1.0;

    CounterRng rng(derive_seed(seed, 0, SeedPurpose::sample));
    PairwiseAccumulator acc, acc_sq;
    for (std::size_t t = 0; t < n_trials; ++t) {
        const SampleDraw draw = multinomial_draw(p, k, rng);
        double s = 0.0;
        for (std::size_t l : draw.active) {
            const double wn = ipw_weight(k, p[l], clip_c) * draw.counts[l];
            s += wn * wn * v[l];
        }
        acc.add(s);
        acc_sq.add(s * s);
    }
    const double n = static_cast<double>(n_trials);
    const double mean = acc.total() / n;
    const double var = std::max(0.0, (acc_sq.total() - n * mean * mean) / (n - 1.0));
    const double se = std::sqrt(var / n);

    ValidationReport report;
    report.claim_id = "second_moment_cap";
    report.bound = cap;
    report.estimate = mean;
    report.se = se;
    report.n_trials = n_trials;
    report.pass = mean <= cap + kMcSigmas * se;
    report.variance_sigma2 = mean;
    return report;
}

// Analytic bias against the proposition's bound. G must dominate the layer
// gradient magnitudes.
inline ValidationReport check_bias_bound(std::span<const double> layer_grad_norms,
                                         std::span<const double> p, std::size_t k, double clip_c,
                                         double grad_bound_G) {
    for (double g : layer_grad_norms) {
        if (g > grad_bound_G) {
            throw domain_error("check_bias_bound: G below a layer gradient magnitude");
        }
    }
    const double bias = analytic_bias_norm(layer_grad_norms, p, k, clip_c);
    const double bound = bias_bound_value(p, k, clip_c, grad_bound_G);

    ValidationReport report;
    report.claim_id = "bias_bound";
    report.bound = bound;
    report.estimate = bias;
    report.se = 0.0;
    report.n_trials = 0;
    report.pass = bias <= bound + kAnalyticTol;
    return report;
}

// Monte Carlo counterpart of the analytic bias: empirical per-layer selection
// factors within 4 SE of min(1, C K p_l).
inline ValidationReport check_bias_bound_mc(std::span<const double> layer_grad_norms,
                                            std::span<const double> p, std::size_t k,
                                            double clip_c, std::size_t n_trials,
                                            std::uint64_t seed) {
    const std::size_t layers = p.size();
    CounterRng rng(derive_seed(seed, 0, SeedPurpose::sample));
    std::vector<double> sum(layers, 0.0), sum_sq(layers, 0.0);
    for (std::size_t t = 0; t < n_trials; ++t) {
        const SampleDraw draw = multinomial_draw(p, k, rng);
        for (std::size_t l : draw.active) {
            const double f = ipw_weight(k, p[l], clip_c) * draw.counts[l];
            sum[l] += f;
            sum_sq[l] += f * f;
        }
    }
    const double n = static_cast<double>(n_trials);
    double worst_ratio = 0.0;
    double worst_se = 0.0;
    for (std::size_t l = 0; l < layers; ++l) {
        const double mean = sum[l] / n;
        const double target = analytic_selection_factor(k, p[l], clip_c);
        const double var = std::max(0.0, (sum_sq[l] - n * mean * mean) / (n - 1.0));
        const double se = std::sqrt(var / n);
        const double ratio = se > 0.0 ? std::abs(mean - target) / se
                                      : (mean == target ? 0.0 : std::numeric_limits<double>::infinity());
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_se = se;
        }
    }
    (void)layer_grad_norms;

    ValidationReport report;
    report.claim_id = "bias_bound_mc";
    report.bound = kMcSigmas;
    report.estimate = worst_ratio;
    report.se = worst_se;
    report.n_trials = n_trials;
    report.pass = worst_ratio <= kMcSigmas;
    return report;
}

// ---------------------------------------------------------------------------
// Correlation tracking between the sampling distribution and the oracle
// per-layer gradient norms.
// ---------------------------------------------------------------------------

struct CorrelationReport {
    std::size_t step = 0;
    std::optional<double> instantaneous_r; // Pearson(p_t, norms at theta_t)
    std::optional<double> cumulative_r;    // Pearson(mean of p up to t, norms at theta_t)
};

class CorrelationTracker {
public:
    explicit CorrelationTracker(const OracleObjective& obj)
        : obj_(obj), prob_sum_(obj.layer_count(), 0.0) {}

    void observe(const LayeredParams& params, const StepReport& rep) {
        if (rep.probs.empty()) {
            throw domain_error("correlation tracking requires record_probs");
        }
        for (std::size_t l = 0; l < prob_sum_.size(); ++l) {
            prob_sum_[l] += rep.probs[l];
        }
        ++seen_;
        const std::vector<double> norms = obj_.layer_grad_norms(params);
        std::vector<double> prob_mean(prob_sum_.size());
        for (std::size_t l = 0; l < prob_sum_.size(); ++l) {
            prob_mean[l] = prob_sum_[l] / static_cast<double>(seen_);
        }
        CorrelationReport rec;
        rec.step = rep.step;
        rec.instantaneous_r = pearson(rep.probs, norms);
        rec.cumulative_r = pearson(prob_mean, norms);
        reports_.push_back(rec);
    }

    const std::vector<CorrelationReport>& reports() const { return reports_; }

private:
    const OracleObjective& obj_;
    std::vector<double> prob_sum_;
    std::size_t seen_ = 0;
    std::vector<CorrelationReport> reports_;
};

// Runs the configured method while tracking the correlation trajectory.
inline std::vector<CorrelationReport> track_correlation(const OracleObjective& obj,
                                                        const RunConfig& cfg,
                                                        const LayeredParams& init) {
    if (!cfg.record_probs) {
        throw domain_error("track_correlation: cfg.record_probs must be enabled");
    }
    CorrelationTracker tracker(obj);
    run(obj, cfg, init,
        [&tracker](const LayeredParams& params, const StepReport& rep) {
            tracker.observe(params, rep);
        });
    return tracker.reports();
}

} // namespace zo
