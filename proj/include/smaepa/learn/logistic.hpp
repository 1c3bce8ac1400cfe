#pragma once

// Multinomial (softmax) logistic regression fitted by full-batch gradient
// descent on the L2-regularized mean cross-entropy
//
//     L(W, b) = -1/n sum_i log softmax(W x_i + b)[y_i] + l2/2 * ||W||^2
//
// The bias is not regularized. A step that raises the loss by more than
// kLossSlack is undone and retried with half the learning rate, so the loss
// sequence is non-increasing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "smaepa/learn/matrix.hpp"

namespace smaepa::learn {

struct LogisticConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 500;
    double l2 = 1e-3;
    std::uint64_t seed = 0; // unused by full-batch descent; kept for metadata
    bool standardize = true;
};

inline constexpr double kLossSlack = 1e-9;
inline constexpr int kMaxHalvings = 60;

inline void validate(const LogisticConfig& c) {
    if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) throw ConfigError("learning_rate must be positive");
    if (c.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(c.l2 >= 0.0) || !std::isfinite(c.l2)) throw ConfigError("l2 must be non-negative");
}

struct LogisticModel {
    std::size_t classes = 0;
    std::size_t features = 0;
    std::vector<double> weights; // classes x features, row-major
    std::vector<double> bias;    // classes
    std::vector<double> mean;    // standardization offset per feature
    std::vector<double> scale;   // multiplier per feature; 0 for constant features

    // Training trace.
    std::vector<double> loss_history;
    std::size_t halvings = 0;

    double w(std::size_t c, std::size_t j) const noexcept { return weights[c * features + j]; }
};

struct LossGradient {
    double loss = 0.0;
    std::vector<double> d_weights;
    std::vector<double> d_bias;
};

namespace detail {

inline void softmax_inplace(std::span<double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (auto& v : z) {
        v = std::exp(v - mx);
        s += v;
    }
    for (auto& v : z) v /= s;
}

} // namespace detail

namespace detail {

// xs is n x d row-major and xt its d x n transpose; both products run as
// axpy-style inner loops, which vectorize under strict floating point.
inline LossGradient loss_gradient(const Matrix& xs, const Matrix& xt, const std::vector<int>& y, std::size_t q,
                                  std::span<const double> weights, std::span<const double> bias, double l2) {
    const auto n = xs.rows();
    const auto d = xs.cols();
    LossGradient g{0.0, std::vector<double>(q * d, 0.0), std::vector<double>(q, 0.0)};

    // Forward: z[c] = b[c] + sum_j w[c][j] * xt[j], four columns per pass.
    std::vector<double> z(q * n);
    for (std::size_t c = 0; c < q; ++c) {
        double* zc = z.data() + c * n;
        const double* wc = weights.data() + c * d;
        std::fill(zc, zc + n, bias[c]);
        std::size_t j = 0;
        for (; j + 4 <= d; j += 4) {
            const double w0 = wc[j], w1 = wc[j + 1], w2 = wc[j + 2], w3 = wc[j + 3];
            const double *c0 = xt.row(j).data(), *c1 = xt.row(j + 1).data(), *c2 = xt.row(j + 2).data(),
                         *c3 = xt.row(j + 3).data();
            for (std::size_t i = 0; i < n; ++i) zc[i] += w0 * c0[i] + w1 * c1[i] + w2 * c2[i] + w3 * c3[i];
        }
        for (; j < d; ++j) {
            const double w = wc[j];
            const double* col = xt.row(j).data();
            for (std::size_t i = 0; i < n; ++i) zc[i] += w * col[i];
        }
    }

    // Residuals p - onehot(y), stored over z.
    std::vector<double> e(q);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = z[i];
        for (std::size_t c = 1; c < q; ++c) mx = std::max(mx, z[c * n + i]);
        double s = 0.0;
        for (std::size_t c = 0; c < q; ++c) {
            e[c] = std::exp(z[c * n + i] - mx);
            s += e[c];
        }
        const auto yi = static_cast<std::size_t>(y[i]);
        g.loss -= z[yi * n + i] - mx - std::log(s);
        for (std::size_t c = 0; c < q; ++c) {
            const double rc = e[c] / s - (c == yi ? 1.0 : 0.0);
            z[c * n + i] = rc;
            g.d_bias[c] += rc;
        }
    }

    // Backward: grad[c] = sum_i r[c][i] * xs[i], four rows per pass.
    for (std::size_t c = 0; c < q; ++c) {
        const double* rc = z.data() + c * n;
        double* gc = g.d_weights.data() + c * d;
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            const double r0 = rc[i], r1 = rc[i + 1], r2 = rc[i + 2], r3 = rc[i + 3];
            const double *x0 = xs.row(i).data(), *x1 = xs.row(i + 1).data(), *x2 = xs.row(i + 2).data(),
                         *x3 = xs.row(i + 3).data();
            for (std::size_t j = 0; j < d; ++j) gc[j] += r0 * x0[j] + r1 * x1[j] + r2 * x2[j] + r3 * x3[j];
        }
        for (; i < n; ++i) {
            const double r = rc[i];
            const double* x = xs.row(i).data();
            for (std::size_t j = 0; j < d; ++j) gc[j] += r * x[j];
        }
    }

    const double inv = 1.0 / static_cast<double>(n);
    g.loss *= inv;
    for (auto& v : g.d_bias) v *= inv;
    double sq = 0.0;
    for (std::size_t k = 0; k < g.d_weights.size(); ++k) {
        g.d_weights[k] = g.d_weights[k] * inv + l2 * weights[k];
        sq += weights[k] * weights[k];
    }
    g.loss += 0.5 * l2 * sq;
    return g;
}

inline Matrix transposed(const Matrix& x) {
    Matrix t(x.cols(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) t(j, i) = x(i, j);
    return t;
}

} // namespace detail

// Loss and analytic gradient at (weights, bias) for already-standardized rows.
inline LossGradient logistic_loss_gradient(const Matrix& xs, const std::vector<int>& y, std::size_t q,
                                           std::span<const double> weights, std::span<const double> bias, double l2) {
    return detail::loss_gradient(xs, detail::transposed(xs), y, q, weights, bias, l2);
}

inline Matrix standardized(const Matrix& x, const std::vector<double>& mean, const std::vector<double>& scale) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) * scale[j];
    return out;
}

inline LogisticModel fit_logistic(const Matrix& x, const std::vector<int>& y, int q_int, const LogisticConfig& cfg) {
    check_training_input(x, y, q_int);
    validate(cfg);
    const auto q = static_cast<std::size_t>(q_int);
    const auto n = x.rows();
    const auto d = x.cols();

    LogisticModel m;
    m.classes = q;
    m.features = d;
    m.mean.assign(d, 0.0);
    m.scale.assign(d, 1.0);
    if (cfg.standardize) {
        for (std::size_t j = 0; j < d; ++j) {
            double mu = 0.0;
            for (std::size_t i = 0; i < n; ++i) mu += x(i, j);
            mu /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mu) * (x(i, j) - mu);
            const double sd = std::sqrt(ss / static_cast<double>(n));
            m.mean[j] = mu;
            m.scale[j] = sd > 0.0 ? 1.0 / sd : 0.0;
        }
    }
    const Matrix xs = standardized(x, m.mean, m.scale);
    const Matrix xt = detail::transposed(xs);

    // Start from the log class priors so uninformative inputs reproduce them.
    std::vector<double> counts(q, 0.0);
    for (int label : y) counts[static_cast<std::size_t>(label)] += 1.0;
    m.weights.assign(q * d, 0.0);
    m.bias.resize(q);
    for (std::size_t c = 0; c < q; ++c)
        m.bias[c] = std::log(std::max(counts[c], 0.5) / static_cast<double>(n));

    double lr = cfg.learning_rate;
    auto current = detail::loss_gradient(xs, xt, y, q, m.weights, m.bias, cfg.l2);
    if (!std::isfinite(current.loss)) throw TrainingDiverged(0);
    m.loss_history.push_back(current.loss);

    std::vector<double> w_next(q * d), b_next(q);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int attempt = 0;; ++attempt) {
            for (std::size_t k = 0; k < w_next.size(); ++k) w_next[k] = m.weights[k] - lr * current.d_weights[k];
            for (std::size_t c = 0; c < q; ++c) b_next[c] = m.bias[c] - lr * current.d_bias[c];
            auto next = detail::loss_gradient(xs, xt, y, q, w_next, b_next, cfg.l2);
            if (!std::isfinite(next.loss)) {
                if (attempt >= kMaxHalvings) throw TrainingDiverged(epoch);
            } else if (next.loss <= current.loss + kLossSlack) {
                m.weights.swap(w_next);
                m.bias.swap(b_next);
                current = std::move(next);
                break;
            }
            if (attempt >= kMaxHalvings) {
                // No step size decreases the loss: converged to machine precision.
                epoch = cfg.epochs;
                break;
            }
            lr /= 2.0;
            ++m.halvings;
        }
        m.loss_history.push_back(current.loss);
    }
    return m;
}

inline std::vector<double> logistic_probabilities(const LogisticModel& m, std::span<const double> x) {
    std::vector<double> z(m.classes);
    for (std::size_t c = 0; c < m.classes; ++c) {
        double acc = m.bias[c];
        for (std::size_t j = 0; j < m.features; ++j) acc += m.w(c, j) * (x[j] - m.mean[j]) * m.scale[j];
        z[c] = acc;
    }
    detail::softmax_inplace(z);
    return z;
}

// Sum over classes of |weight| in standardized units.
inline std::vector<double> logistic_importance(const LogisticModel& m) {
    std::vector<double> out(m.features, 0.0);
    for (std::size_t c = 0; c < m.classes; ++c)
        for (std::size_t j = 0; j < m.features; ++j) out[j] += std::abs(m.w(c, j));
    return out;
}

} // namespace smaepa::learn
