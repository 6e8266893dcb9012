#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace qasched {

/// Matern-5/2 kernel with per-dimension length-scales.
double matern52(std::span<const double> x, std::span<const double> x2, std::span<const double> lengthscales,
                double signal_var);

struct GpHyper {
    Eigen::VectorXd lengthscales;
    double signal_var = 1.0;
    double noise_var = 1e-4;
};

/// Search box for hyperparameter fitting (in the standardized target units).
struct GpHyperBounds {
    double lengthscale_min = 5e-3;
    double lengthscale_max = 2.0;
    double signal_var_min = 1e-3;
    double signal_var_max = 1e3;
    double noise_var_min = 1e-8;
    double noise_var_max = 1.0;
};

struct GpFitConfig {
    int restarts = 5;
    int max_iterations = 60;
    std::uint64_t seed = 0;
    GpHyperBounds bounds;
};

/// Exact GP regression model with a cached Cholesky factor of K + noise I.
class GpModel {
public:
    /// Factorizes with fixed hyperparameters. When `standardize` is set the
    /// targets are shifted to zero mean and scaled to unit variance; the
    /// posterior is always reported in the original units.
    static GpModel build(Eigen::MatrixXd X, const Eigen::VectorXd& y, GpHyper hyper, bool standardize = true);

    struct Prediction {
        double mean = 0.0;
        double var = 0.0;
    };

    /// Latent-function posterior at x. Points outside the unit cube are
    /// clamped into it (with a warning).
    Prediction posterior(std::span<const double> x) const;

    /// Log marginal likelihood of the (standardized) targets.
    double log_marginal_likelihood() const;

    /// Gradient of the log marginal likelihood with respect to
    /// (log l_1..log l_p, log signal_var, log noise_var).
    Eigen::VectorXd lml_gradient() const;

    const Eigen::MatrixXd& inputs() const { return X_; }
    const Eigen::VectorXd& targets() const { return y_; }
    const GpHyper& hyper() const { return hyper_; }
    const Eigen::MatrixXd& cholesky() const { return chol_; }
    double y_mean() const { return y_mean_; }
    double y_scale() const { return y_scale_; }
    double jitter() const { return jitter_; }
    int size() const { return static_cast<int>(X_.rows()); }
    int dims() const { return static_cast<int>(X_.cols()); }

    /// K + (noise + jitter) I, rebuilt from the inputs.
    Eigen::MatrixXd kernel_matrix() const;

private:
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;  // standardized
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    GpHyper hyper_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

/// Fits hyperparameters by multi-start projected gradient ascent on the log
/// marginal likelihood in log coordinates. Start 0 is the default
/// (l = 1, signal 1, noise 1e-4) clamped to the bounds; the remaining starts
/// are drawn log-uniformly from the bounds.
GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpFitConfig& config = {});

GpHyper default_hyper(int dims);

}  // namespace qasched
