#include "qasched/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "qasched/errors.hpp"
#include "qasched/rng.hpp"

namespace qasched {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;
constexpr double kNoiseFloor = 1e-8;

double scaled_distance(std::span<const double> x, std::span<const double> x2, std::span<const double> ls) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double r = (x[j] - x2[j]) / ls[j];
        d2 += r * r;
    }
    return std::sqrt(d2);
}

double matern52_of_distance(double d, double signal_var) {
    return signal_var * (1.0 + kSqrt5 * d + (5.0 / 3.0) * d * d) * std::exp(-kSqrt5 * d);
}

}  // namespace

double matern52(std::span<const double> x, std::span<const double> x2, std::span<const double> lengthscales,
                double signal_var) {
    if (x.size() != x2.size() || x.size() != lengthscales.size())
        throw InvalidArgument("matern52: dimension mismatch");
    return matern52_of_distance(scaled_distance(x, x2, lengthscales), signal_var);
}

GpHyper default_hyper(int dims) { return {Eigen::VectorXd::Ones(dims), 1.0, 1e-4}; }

GpModel GpModel::build(Eigen::MatrixXd X, const Eigen::VectorXd& y, GpHyper hyper, bool standardize) {
    const int n = static_cast<int>(X.rows());
    if (n < 1) throw InvalidArgument("GpModel: need at least one observation");
    if (y.size() != n) throw InvalidArgument("GpModel: X and y sizes differ");
    if (!y.allFinite() || !X.allFinite()) throw InvalidArgument("GpModel: non-finite training data");
    if (hyper.lengthscales.size() != X.cols()) throw InvalidArgument("GpModel: lengthscale count mismatch");
    if ((hyper.lengthscales.array() <= 0.0).any() || !(hyper.signal_var > 0.0))
        throw InvalidArgument("GpModel: hyperparameters must be positive");

    GpModel m;
    m.X_ = std::move(X);
    hyper.noise_var = std::max(hyper.noise_var, kNoiseFloor);
    m.hyper_ = std::move(hyper);
    if (standardize) {
        m.y_mean_ = y.mean();
        const double var = (y.array() - m.y_mean_).square().mean();
        const double sd = std::sqrt(var);
        m.y_scale_ = sd > 1e-12 * (1.0 + std::abs(m.y_mean_)) ? sd : 1.0;
    }
    m.y_ = (y.array() - m.y_mean_) / m.y_scale_;

    const Eigen::MatrixXd base = m.kernel_matrix();
    static constexpr double kJitter[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
    for (double jitter : kJitter) {
        Eigen::LLT<Eigen::MatrixXd> llt(base + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) {
            m.jitter_ = jitter;
            m.chol_ = llt.matrixL();
            m.alpha_ = llt.solve(m.y_);
            return m;
        }
    }
    throw NumericalFailure("GpModel: kernel matrix not positive definite after jitter escalation");
}

Eigen::MatrixXd GpModel::kernel_matrix() const {
    const int n = size();
    const Eigen::MatrixXd Xr = X_.transpose();  // column-major transpose gives contiguous rows
    const std::span<const double> ls(hyper_.lengthscales.data(), hyper_.lengthscales.size());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        const std::span<const double> xi(Xr.data() + static_cast<std::ptrdiff_t>(i) * dims(), dims());
        K(i, i) = hyper_.signal_var + hyper_.noise_var + jitter_;
        for (int j = i + 1; j < n; ++j) {
            const std::span<const double> xj(Xr.data() + static_cast<std::ptrdiff_t>(j) * dims(), dims());
            K(i, j) = K(j, i) = matern52_of_distance(scaled_distance(xi, xj, ls), hyper_.signal_var);
        }
    }
    return K;
}

GpModel::Prediction GpModel::posterior(std::span<const double> x_in) const {
    if (static_cast<int>(x_in.size()) != dims()) throw InvalidArgument("posterior: dimension mismatch");
    std::vector<double> x(x_in.begin(), x_in.end());
    bool clamped = false;
    for (double& v : x) {
        const double c = std::clamp(v, 0.0, 1.0);
        clamped |= (c != v);
        v = c;
    }
    if (clamped) warn("posterior: query point clamped into the unit cube");

    const int n = size();
    const std::span<const double> ls(hyper_.lengthscales.data(), hyper_.lengthscales.size());
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i) {
        double d2 = 0.0;
        for (int j = 0; j < dims(); ++j) {
            const double r = (x[j] - X_(i, j)) / ls[j];
            d2 += r * r;
        }
        k[i] = matern52_of_distance(std::sqrt(d2), hyper_.signal_var);
    }
    const double mean_std = k.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    const double var_std = std::max(0.0, hyper_.signal_var - v.squaredNorm());
    return {y_mean_ + y_scale_ * mean_std, y_scale_ * y_scale_ * var_std};
}

double GpModel::log_marginal_likelihood() const {
    const int n = size();
    const double log_det_half = chol_.diagonal().array().log().sum();
    return -0.5 * y_.dot(alpha_) - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd GpModel::lml_gradient() const {
    const int n = size();
    const int p = dims();
    const auto L = chol_.triangularView<Eigen::Lower>();
    Eigen::MatrixXd Kinv = L.solve(Eigen::MatrixXd::Identity(n, n));
    Kinv = L.transpose().solve(Kinv);
    const Eigen::MatrixXd G = alpha_ * alpha_.transpose() - Kinv;

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p + 2);
    const double sv = hyper_.signal_var;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double d2 = 0.0;
            for (int c = 0; c < p; ++c) {
                const double r = (X_(i, c) - X_(j, c)) / hyper_.lengthscales[c];
                d2 += r * r;
            }
            const double d = std::sqrt(d2);
            const double e = std::exp(-kSqrt5 * d);
            // d k / d log(signal_var) = k itself
            grad[p] += 0.5 * G(i, j) * sv * (1.0 + kSqrt5 * d + (5.0 / 3.0) * d2) * e;
            if (i == j) continue;
            const double common = (5.0 / 3.0) * sv * (1.0 + kSqrt5 * d) * e;
            for (int c = 0; c < p; ++c) {
                const double r = (X_(i, c) - X_(j, c)) / hyper_.lengthscales[c];
                grad[c] += 0.5 * G(i, j) * common * r * r;
            }
        }
    }
    grad[p + 1] = 0.5 * hyper_.noise_var * G.trace();
    return grad;
}

namespace {

struct LogParams {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

GpHyper hyper_from_log(const Eigen::VectorXd& theta, int p) {
    GpHyper h;
    h.lengthscales = theta.head(p).array().exp();
    h.signal_var = std::exp(theta[p]);
    h.noise_var = std::exp(theta[p + 1]);
    return h;
}

}  // namespace

GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpFitConfig& config) {
    if (!y.allFinite()) throw InvalidArgument("fit_gp: non-finite targets");
    const int p = static_cast<int>(X.cols());
    const auto& b = config.bounds;
    LogParams box{Eigen::VectorXd(p + 2), Eigen::VectorXd(p + 2)};
    box.lo.head(p).setConstant(std::log(b.lengthscale_min));
    box.hi.head(p).setConstant(std::log(b.lengthscale_max));
    box.lo[p] = std::log(b.signal_var_min);
    box.hi[p] = std::log(b.signal_var_max);
    box.lo[p + 1] = std::log(b.noise_var_min);
    box.hi[p + 1] = std::log(b.noise_var_max);
    auto project = [&](const Eigen::VectorXd& t) { return t.cwiseMax(box.lo).cwiseMin(box.hi).eval(); };

    auto evaluate = [&](const Eigen::VectorXd& theta, GpModel* out) -> double {
        try {
            GpModel m = GpModel::build(X, y, hyper_from_log(theta, p), true);
            const double v = m.log_marginal_likelihood();
            if (out) *out = std::move(m);
            return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
        } catch (const NumericalFailure&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    std::vector<Eigen::VectorXd> starts;
    {
        const GpHyper d = default_hyper(p);
        Eigen::VectorXd t(p + 2);
        t.head(p) = d.lengthscales.array().log();
        t[p] = std::log(d.signal_var);
        t[p + 1] = std::log(d.noise_var);
        starts.push_back(project(t));
        Rng rng(derive_seed(config.seed, 0x6770));
        for (int r = 1; r < std::max(1, config.restarts); ++r) {
            Eigen::VectorXd s(p + 2);
            for (int c = 0; c < p + 2; ++c) s[c] = rng.uniform(box.lo[c], box.hi[c]);
            starts.push_back(s);
        }
    }

    Eigen::VectorXd best_theta;
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        Eigen::VectorXd theta = start;
        GpModel current;
        double value = evaluate(theta, &current);
        if (!std::isfinite(value)) continue;
        double step = 0.5;
        for (int it = 0; it < config.max_iterations; ++it) {
            const Eigen::VectorXd g = current.lml_gradient();
            bool accepted = false;
            double gain = 0.0;
            double t = step;
            for (int ls = 0; ls < 30; ++ls) {
                const Eigen::VectorXd cand = project(theta + t * g);
                const Eigen::VectorXd delta = cand - theta;
                if (delta.norm() < 1e-10) break;
                GpModel m;
                const double v = evaluate(cand, &m);
                if (v >= value + 1e-4 * g.dot(delta)) {
                    gain = v - value;
                    theta = cand;
                    value = v;
                    current = std::move(m);
                    accepted = true;
                    step = std::min(2.0 * t, 10.0);
                    break;
                }
                t *= 0.5;
            }
            if (!accepted || gain < 1e-9) break;
        }
        if (value > best_value) {
            best_value = value;
            best_theta = theta;
        }
    }
    if (best_theta.size() == 0) throw NumericalFailure("fit_gp: no restart produced a valid model");
    return GpModel::build(X, y, hyper_from_log(best_theta, p), true);
}

}  // namespace qasched
