#pragma once

// Desk-scale objectives. Optimizers see only Objective::loss (forward-only
// access); analytic gradients live on the separate OracleObjective interface
// so optimizer code cannot reach them.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "zo/errors.hpp"
#include "zo/params.hpp"
#include "zo/rng.hpp"

namespace zo {

struct OracleConfig {
    double smoothness_L_g = 1.0; // Lipschitz constant of the gradient
    double grad_bound_G = 1.0;   // bound on the gradient norm near init
    double smoothing_mu = 1e-3;
};

class Objective {
public:
    virtual ~Objective() = default;

    virtual double loss(const LayeredParams& params) const = 0;
    virtual const std::vector<std::size_t>& layer_sizes() const = 0;

    std::size_t layer_count() const { return layer_sizes().size(); }
    std::size_t total_dim() const {
        std::size_t d = 0;
        for (std::size_t s : layer_sizes()) d += s;
        return d;
    }

    LayeredParams make_params() const { return LayeredParams(layer_sizes()); }
};

// Validation-only view: analytic gradient plus the constants the appendix
// bounds are stated in terms of.
class OracleObjective : public Objective {
public:
    virtual LayeredParams oracle_grad(const LayeredParams& params) const = 0;
    virtual OracleConfig oracle_config() const = 0;

    std::vector<double> layer_grad_norms(const LayeredParams& params) const {
        const LayeredParams g = oracle_grad(params);
        std::vector<double> norms(g.layer_count());
        for (std::size_t l = 0; l < g.layer_count(); ++l) {
            norms[l] = std::sqrt(g.layer_squared_norm(l));
        }
        return norms;
    }
};

// ---------------------------------------------------------------------------
// 0.5 * sum_l a_l * ||theta^(l)||^2 with per-layer curvature scales.
// ---------------------------------------------------------------------------

class HeterogeneousQuadratic final : public OracleObjective {
public:
    HeterogeneousQuadratic(std::vector<double> scales, std::vector<std::size_t> sizes)
        : scales_(std::move(scales)), sizes_(std::move(sizes)) {
        if (scales_.size() != sizes_.size()) {
            throw dimension_error("quadratic_hetero: scales and sizes differ in length");
        }
        if (sizes_.empty()) {
            throw domain_error("quadratic_hetero: no layers");
        }
        for (double a : scales_) {
            if (!(a > 0.0)) {
                throw domain_error("quadratic_hetero: scales must be > 0");
            }
        }
    }

    double loss(const LayeredParams& params) const override {
        double total = 0.0;
        for (std::size_t l = 0; l < sizes_.size(); ++l) {
            total += scales_[l] * params.layer_squared_norm(l);
        }
        return 0.5 * total;
    }

    LayeredParams oracle_grad(const LayeredParams& params) const override {
        LayeredParams g(sizes_);
        for (std::size_t l = 0; l < sizes_.size(); ++l) {
            auto src = params.layer(l);
            auto dst = g.layer(l);
            for (std::size_t i = 0; i < src.size(); ++i) {
                dst[i] = scales_[l] * src[i];
            }
        }
        return g;
    }

    OracleConfig oracle_config() const override {
        double max_scale = 0.0;
        std::size_t d = 0;
        for (std::size_t l = 0; l < sizes_.size(); ++l) {
            max_scale = std::max(max_scale, scales_[l]);
            d += sizes_[l];
        }
        // G bounds the gradient on the unit box, where runs start.
        return {max_scale, max_scale * std::sqrt(static_cast<double>(d)), 1e-3};
    }

    const std::vector<std::size_t>& layer_sizes() const override { return sizes_; }
    const std::vector<double>& scales() const { return scales_; }

private:
    std::vector<double> scales_;
    std::vector<std::size_t> sizes_;
};

inline std::unique_ptr<HeterogeneousQuadratic> quadratic_hetero(std::vector<double> scales,
                                                                std::vector<std::size_t> sizes) {
    return std::make_unique<HeterogeneousQuadratic>(std::move(scales), std::move(sizes));
}

// ---------------------------------------------------------------------------
// Binary cross-entropy of a linear model on seeded Gaussian data, labels
// planted by a hidden ground-truth weight vector.
// ---------------------------------------------------------------------------

class LogisticSynthetic final : public OracleObjective {
public:
    LogisticSynthetic(std::size_t n_samples, std::vector<std::size_t> sizes,
                      std::uint64_t data_seed)
        : sizes_(std::move(sizes)), n_(n_samples) {
        if (n_ < 1) {
            throw domain_error("logistic_synthetic: n_samples must be >= 1");
        }
        if (sizes_.empty()) {
            throw domain_error("logistic_synthetic: no layers");
        }
        dim_ = 0;
        for (std::size_t s : sizes_) dim_ += s;

        GaussianStream xs(derive_seed(data_seed, 0, SeedPurpose::data));
        GaussianStream ws(derive_seed(data_seed, 1, SeedPurpose::data));
        features_.resize(n_ * dim_);
        xs.fill(features_);
        planted_.resize(dim_);
        ws.fill(planted_);
        labels_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            double margin = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                margin += features_[i * dim_ + j] * planted_[j];
            }
            labels_[i] = margin > 0.0 ? 1.0 : 0.0;
        }
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                const double x = features_[i * dim_ + j];
                s += x * x;
            }
            sum_sq += s;
        }
        // Hessian = (1/n) sum sig' x x^T with sig' <= 1/4.
        smoothness_ = 0.25 * sum_sq / static_cast<double>(n_);
        grad_bound_ = sum_sq / static_cast<double>(n_);
    }

    double loss(const LayeredParams& params) const override {
        const auto theta = params.flat();
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double margin = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                margin += features_[i * dim_ + j] * theta[j];
            }
            // -[y log sig(m) + (1-y) log(1 - sig(m))], written via log1p for
            // stability at large |margin|.
            const double y = labels_[i];
            if (margin >= 0.0) {
                total += std::log1p(std::exp(-margin)) + (1.0 - y) * margin;
            } else {
                total += std::log1p(std::exp(margin)) - y * margin;
            }
        }
        return total / static_cast<double>(n_);
    }

    LayeredParams oracle_grad(const LayeredParams& params) const override {
        const auto theta = params.flat();
        std::vector<double> g(dim_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double margin = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                margin += features_[i * dim_ + j] * theta[j];
            }
            const double sig = 1.0 / (1.0 + std::exp(-margin));
            const double coef = sig - labels_[i];
            for (std::size_t j = 0; j < dim_; ++j) {
                g[j] += coef * features_[i * dim_ + j];
            }
        }
        for (double& v : g) v /= static_cast<double>(n_);
        return partition(g, sizes_);
    }

    OracleConfig oracle_config() const override { return {smoothness_, grad_bound_, 1e-3}; }
    const std::vector<std::size_t>& layer_sizes() const override { return sizes_; }

    // Direction along which the planted labels become separable.
    LayeredParams planted_direction() const { return partition(planted_, sizes_); }

private:
    std::vector<std::size_t> sizes_;
    std::size_t n_;
    std::size_t dim_ = 0;
    std::vector<double> features_; // n x dim, row-major
    std::vector<double> planted_;
    std::vector<double> labels_;
    double smoothness_ = 1.0;
    double grad_bound_ = 1.0;
};

inline std::unique_ptr<LogisticSynthetic> logistic_synthetic(std::size_t n_samples,
                                                             std::vector<std::size_t> sizes,
                                                             std::uint64_t data_seed) {
    return std::make_unique<LogisticSynthetic>(n_samples, std::move(sizes), data_seed);
}

// ---------------------------------------------------------------------------
// Tiny tanh MLP regression. Each weight matrix and each bias vector is its
// own layer block, so widths {4, 8, 1} give L = 4 blocks.
// ---------------------------------------------------------------------------

class TinyMlp final : public OracleObjective {
public:
    TinyMlp(std::vector<std::size_t> widths, std::uint64_t data_seed, std::size_t n_samples = 32)
        : widths_(std::move(widths)), n_(n_samples) {
        init_shape();

        const std::size_t in_dim = widths_.front();
        const std::size_t out_dim = widths_.back();
        GaussianStream xs(derive_seed(data_seed, 0, SeedPurpose::data));
        inputs_.resize(n_ * in_dim);
        xs.fill(inputs_);

        // Targets from a random teacher net of the same shape plus noise,
        // so the loss surface has learnable structure.
        LayeredParams teacher((std::vector<std::size_t>(sizes_)));
        GaussianStream ts(derive_seed(data_seed, 1, SeedPurpose::data));
        ts.fill(teacher.flat());
        for (double& v : teacher.flat()) v *= 0.7;
        targets_.resize(n_ * out_dim);
        std::vector<double> buf_a, buf_b;
        GaussianStream noise(derive_seed(data_seed, 2, SeedPurpose::data));
        for (std::size_t i = 0; i < n_; ++i) {
            forward(teacher, {inputs_.data() + i * in_dim, in_dim}, buf_a, buf_b, nullptr);
            for (std::size_t j = 0; j < out_dim; ++j) {
                targets_[i * out_dim + j] = buf_a[j] + 0.1 * noise.at(i * out_dim + j);
            }
        }
        estimate_constants(data_seed);
    }

    // Explicit dataset, row-major n x in_dim inputs and n x out_dim targets.
    TinyMlp(std::vector<std::size_t> widths, std::vector<double> inputs,
            std::vector<double> targets)
        : widths_(std::move(widths)) {
        init_shape();
        const std::size_t in_dim = widths_.front();
        const std::size_t out_dim = widths_.back();
        if (inputs.empty() || inputs.size() % in_dim != 0 ||
            targets.size() != inputs.size() / in_dim * out_dim) {
            throw dimension_error("mlp_tiny: data shape does not match the widths");
        }
        n_ = inputs.size() / in_dim;
        inputs_ = std::move(inputs);
        targets_ = std::move(targets);
        estimate_constants(0);
    }

    double loss(const LayeredParams& params) const override {
        const std::size_t in_dim = widths_.front();
        const std::size_t out_dim = widths_.back();
        std::vector<double> buf_a, buf_b;
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            forward(params, {inputs_.data() + i * in_dim, in_dim}, buf_a, buf_b, nullptr);
            for (std::size_t j = 0; j < out_dim; ++j) {
                const double r = buf_a[j] - targets_[i * out_dim + j];
                total += r * r;
            }
        }
        return total / static_cast<double>(n_ * out_dim);
    }

    LayeredParams oracle_grad(const LayeredParams& params) const override {
        const std::size_t in_dim = widths_.front();
        const std::size_t out_dim = widths_.back();
        const std::size_t depth = widths_.size() - 1;
        LayeredParams grad((std::vector<std::size_t>(sizes_)));

        std::vector<std::vector<double>> acts(depth + 1);
        std::vector<double> buf_a, buf_b;
        std::vector<double> delta, delta_prev;
        for (std::size_t i = 0; i < n_; ++i) {
            std::span<const double> x{inputs_.data() + i * in_dim, in_dim};
            forward(params, x, buf_a, buf_b, &acts);
            // d loss / d output, with loss averaged over samples and outputs
            delta.assign(out_dim, 0.0);
            for (std::size_t j = 0; j < out_dim; ++j) {
                delta[j] = 2.0 * (acts[depth][j] - targets_[i * out_dim + j]) /
                           static_cast<double>(n_ * out_dim);
            }
            for (std::size_t k = depth; k-- > 0;) {
                // here "k" indexes the affine map widths_[k] -> widths_[k+1]
                const std::size_t rows = widths_[k + 1];
                const std::size_t cols = widths_[k];
                auto w_grad = grad.layer(2 * k);
                auto b_grad = grad.layer(2 * k + 1);
                const auto& below = acts[k];
                for (std::size_t r = 0; r < rows; ++r) {
                    b_grad[r] += delta[r];
                    for (std::size_t c = 0; c < cols; ++c) {
                        w_grad[r * cols + c] += delta[r] * below[c];
                    }
                }
                if (k > 0) {
                    const auto w = params.layer(2 * k);
                    delta_prev.assign(cols, 0.0);
                    for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) {
                            delta_prev[c] += w[r * cols + c] * delta[r];
                        }
                    }
                    // tanh' = 1 - h^2 at the activation below
                    for (std::size_t c = 0; c < cols; ++c) {
                        const double h = acts[k][c];
                        delta_prev[c] *= 1.0 - h * h;
                    }
                    delta.swap(delta_prev);
                }
            }
        }
        return grad;
    }

    OracleConfig oracle_config() const override { return {smoothness_, grad_bound_, 1e-3}; }
    const std::vector<std::size_t>& layer_sizes() const override { return sizes_; }
    std::size_t sample_count() const { return n_; }

    double mean_squared_targets() const {
        double s = 0.0;
        for (double y : targets_) s += y * y;
        return s / static_cast<double>(targets_.size());
    }

private:
    void init_shape() {
        if (widths_.size() < 2) {
            throw domain_error("mlp_tiny: need at least input and output widths");
        }
        for (std::size_t w : widths_) {
            if (w == 0) {
                throw domain_error("mlp_tiny: widths must be >= 1");
            }
        }
        for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
            sizes_.push_back(widths_[k] * widths_[k + 1]); // W_k, row-major [out][in]
            sizes_.push_back(widths_[k + 1]);              // b_k
        }
    }

    // acts (when requested) holds h_0 = x, h_1..h_{depth-1} = tanh layers,
    // h_depth = linear output. buf_a returns the output activations.
    void forward(const LayeredParams& params, std::span<const double> x, std::vector<double>& buf_a,
                 std::vector<double>& buf_b, std::vector<std::vector<double>>* acts) const {
        const std::size_t depth = widths_.size() - 1;
        buf_b.assign(x.begin(), x.end());
        if (acts) {
            (*acts)[0].assign(x.begin(), x.end());
        }
        for (std::size_t k = 0; k < depth; ++k) {
            const std::size_t rows = widths_[k + 1];
            const std::size_t cols = widths_[k];
            const auto w = params.layer(2 * k);
            const auto b = params.layer(2 * k + 1);
            buf_a.assign(rows, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                double acc = b[r];
                for (std::size_t c = 0; c < cols; ++c) {
                    acc += w[r * cols + c] * buf_b[c];
                }
                buf_a[r] = (k + 1 < depth) ? std::tanh(acc) : acc;
            }
            if (acts) {
                (*acts)[k + 1] = buf_a;
            }
            buf_b = buf_a;
        }
    }

    // The appendix assumes the smoothness constant exists but never computes
    // it; estimate it as the max gradient difference ratio over sampled pairs.
    void estimate_constants(std::uint64_t data_seed) {
        GaussianStream ps(derive_seed(data_seed, 3, SeedPurpose::data));
        double max_ratio = 0.0;
        double max_norm = 0.0;
        std::uint64_t idx = 0;
        for (int pair = 0; pair < 24; ++pair) {
            LayeredParams a((std::vector<std::size_t>(sizes_)));
            LayeredParams b((std::vector<std::size_t>(sizes_)));
            for (double& v : a.flat()) v = 0.5 * ps.at(idx++);
            for (double& v : b.flat()) v = 0.5 * ps.at(idx++);
            const LayeredParams ga = oracle_grad(a);
            const LayeredParams gb = oracle_grad(b);
            double diff_sq = 0.0, dist_sq = 0.0;
            const auto gaf = ga.flat();
            const auto gbf = gb.flat();
            const std::span<const double> af = a.flat();
            const std::span<const double> bf = b.flat();
            for (std::size_t j = 0; j < gaf.size(); ++j) {
                const double dg = gaf[j] - gbf[j];
                const double dx = af[j] - bf[j];
                diff_sq += dg * dg;
                dist_sq += dx * dx;
            }
            if (dist_sq > 0.0) {
                max_ratio = std::max(max_ratio, std::sqrt(diff_sq / dist_sq));
            }
            max_norm = std::max({max_norm, std::sqrt(ga.squared_norm()), std::sqrt(gb.squared_norm())});
        }
        smoothness_ = std::max(max_ratio, 1e-6);
        grad_bound_ = std::max(max_norm, 1e-6);
    }

    std::vector<std::size_t> widths_;
    std::vector<std::size_t> sizes_;
    std::size_t n_ = 0;
    std::vector<double> inputs_;
    std::vector<double> targets_;
    double smoothness_ = 1.0;
    double grad_bound_ = 1.0;
};

inline std::unique_ptr<TinyMlp> mlp_tiny(std::vector<std::size_t> widths, std::uint64_t data_seed,
                                         std::size_t n_samples = 32) {
    return std::make_unique<TinyMlp>(std::move(widths), data_seed, n_samples);
}

// ---------------------------------------------------------------------------
// Constant-time dummy objective for latency benchmarks: the forward cost is
// a fixed busy loop, independent of the parameter values.
// ---------------------------------------------------------------------------

class ConstantCost final : public Objective {
public:
    ConstantCost(std::vector<std::size_t> sizes, std::size_t cost_iters = 0)
        : sizes_(std::move(sizes)), cost_iters_(cost_iters) {
        if (sizes_.empty()) {
            throw domain_error("constant objective: no layers");
        }
    }

    double loss(const LayeredParams&) const override {
        std::uint64_t h = 0x9E3779B97F4A7C15ull;
        for (std::size_t i = 0; i < cost_iters_; ++i) {
            h = mix64(h);
        }
        // keep the busy loop observable without changing the value
        return 1.0 + 1e-300 * static_cast<double>(h & 1u);
    }

    const std::vector<std::size_t>& layer_sizes() const override { return sizes_; }

private:
    std::vector<std::size_t> sizes_;
    std::size_t cost_iters_;
};

inline std::unique_ptr<ConstantCost> constant_cost(std::vector<std::size_t> sizes,
                                                   std::size_t cost_iters = 0) {
    return std::make_unique<ConstantCost>(std::move(sizes), cost_iters);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimate of the Gaussian-smoothed gradient (one-sided form)
// with a per-coordinate standard error.
// ---------------------------------------------------------------------------

struct SmoothedGrad {
    LayeredParams mean;
    LayeredParams se;
    std::size_t n_mc = 0;
    double gap_bound = 0.0; // mu * d * L_g / 2 when L_g is supplied
};

inline double smoothing_gap_bound(double mu, std::size_t dim, double smoothness_L_g) {
    return 0.5 * mu * static_cast<double>(dim) * smoothness_L_g;
}

inline SmoothedGrad smoothed_grad_mc(const Objective& obj, const LayeredParams& at, double mu,
                                     std::size_t n_mc, std::uint64_t seed, double smoothness_L_g = 0.0) {
    if (!(mu > 0.0)) {
        throw domain_error("smoothed_grad_mc: mu must be > 0");
    }
    if (n_mc < 1) {
        throw domain_error("smoothed_grad_mc: n_mc must be >= 1");
    }
    const double base = obj.loss(at);
    const std::size_t d = at.total_dim();
    std::vector<double> direction(d);
    std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
    LayeredParams probe = at;
    for (std::size_t k = 0; k < n_mc; ++k) {
        GaussianStream us(derive_seed(seed, k, SeedPurpose::trial));
        us.fill(direction);
        auto flat = probe.flat();
        const auto ref = at.flat();
        for (std::size_t j = 0; j < d; ++j) {
            flat[j] = ref[j] + mu * direction[j];
        }
        const double coef = (obj.loss(probe) - base) / mu;
        for (std::size_t j = 0; j < d; ++j) {
            const double sample = coef * direction[j];
            sum[j] += sample;
            sum_sq[j] += sample * sample;
        }
    }
    SmoothedGrad out{LayeredParams(at.layer_sizes()), LayeredParams(at.layer_sizes()), n_mc,
                     smoothing_gap_bound(mu, d, smoothness_L_g)};
    const auto mean = out.mean.flat();
    const auto se = out.se.flat();
    const double n = static_cast<double>(n_mc);
    for (std::size_t j = 0; j < d; ++j) {
        mean[j] = sum[j] / n;
        const double var = n_mc > 1 ? std::max(0.0, (sum_sq[j] - n * mean[j] * mean[j]) / (n - 1.0)) : 0.0;
        se[j] = std::sqrt(var / n);
    }
    return out;
}

} // namespace zo
