#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cpareto {

struct GpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GpDataPoint {
    std::vector<double> x;  // unit-cube coordinates
    double y = 0.0;
    double std_error = 0.0;  // reported Monte-Carlo noise of y
};

// Gaussian-process regression with an anisotropic squared-exponential kernel
// on standardized targets. Observation noise is the reported per-point
// standard error plus a learned homoscedastic term bounded below by a small
// floor. Hyperparameters are chosen by multi-start gradient ascent on the
// log marginal likelihood (analytic gradients).
class GpModel {
  public:
    static GpModel fit(const std::vector<GpDataPoint>& points, int dim, std::uint64_t seed);

    // Builds a model with fixed hyperparameters (log lengthscales per input
    // dimension, log signal variance, log noise variance), skipping the
    // marginal-likelihood search.
    static GpModel with_params(const std::vector<GpDataPoint>& points, int dim,
                               const std::vector<double>& log_lengthscales, double log_signal_var,
                               double log_noise_var);

    // Posterior mean and variance of the latent function in objective units;
    // variance is clamped to be non-negative.
    std::pair<double, double> posterior(const std::vector<double>& x) const;

    double log_marginal() const { return lml_; }
    // Gradient of the log marginal likelihood wrt [log_ls..., log_sf2, log_sn2].
    Eigen::VectorXd log_marginal_gradient() const;

    int dim() const { return dim_; }
    int n_points() const { return static_cast<int>(X_.rows()); }
    double noise_variance() const;
    const std::vector<double>& log_lengthscales() const { return log_ls_; }

  private:
    void factorize();  // builds the Cholesky (with a jitter ladder), alpha, lml

    int dim_ = 0;
    Eigen::MatrixXd X_;       // n x d
    Eigen::VectorXd y_std_;   // standardized targets
    Eigen::VectorXd se2_std_; // squared reported noise, standardized units
    double y_mean_ = 0.0, y_scale_ = 1.0;

    std::vector<double> log_ls_;
    double log_sf2_ = 0.0;
    double log_sn2_ = 0.0;

    Eigen::MatrixXd kernel_;  // noise-free K
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
    double lml_ = 0.0;
    double jitter_ = 0.0;
};

}  // namespace cpareto
