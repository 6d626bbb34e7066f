#include "causal_pareto/gp.hpp"

#include <algorithm>
#include <cmath>

#include "causal_pareto/rng.hpp"

namespace cpareto {

namespace {

constexpr double kLogLsMin = -4.6051701859880914;   // log 1e-2
constexpr double kLogLsMax = 2.302585092994046;     // log 10
constexpr double kLogSfMin = -13.815510557964274;   // log 1e-6
constexpr double kLogSfMax = 6.907755278982137;     // log 1e3
constexpr double kLogSnMin = -18.420680743952367;   // log 1e-8
constexpr double kLogSnMax = 0.0;                   // log 1
constexpr int kMaxAscentSteps = 60;

struct Prepared {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd se2;
    double mean, scale;
};

Prepared standardize(const std::vector<GpDataPoint>& points, int dim) {
    if (points.empty()) throw GpError("GP fit requires at least one point");
    std::size_t n = points.size();
    Prepared p;
    p.X.resize(static_cast<Eigen::Index>(n), dim);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(points[i].x.size()) != dim) throw GpError("GP input dimension mismatch");
        for (int d = 0; d < dim; ++d) p.X(static_cast<Eigen::Index>(i), d) = points[i].x[static_cast<std::size_t>(d)];
        if (!std::isfinite(points[i].y)) throw GpError("non-finite GP target");
        y(static_cast<Eigen::Index>(i)) = points[i].y;
    }
    p.mean = y.mean();
    double var = n > 1 ? (y.array() - p.mean).square().sum() / static_cast<double>(n - 1) : 0.0;
    p.scale = var > 0 ? std::sqrt(var) : 1.0;
    p.y = (y.array() - p.mean) / p.scale;
    p.se2.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double se = points[i].std_error / p.scale;
        p.se2(static_cast<Eigen::Index>(i)) = se * se;
    }
    return p;
}

}  // namespace

void GpModel::factorize() {
    Eigen::Index n = X_.rows();
    double sf2 = std::exp(log_sf2_);
    double sn2 = std::exp(log_sn2_);
    kernel_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double d2 = 0.0;
            for (int d = 0; d < dim_; ++d) {
                double ls = std::exp(log_ls_[static_cast<std::size_t>(d)]);
                double diff = (X_(i, d) - X_(j, d)) / ls;
                d2 += diff * diff;
            }
            double k = sf2 * std::exp(-0.5 * d2);
            kernel_(i, j) = k;
            kernel_(j, i) = k;
        }
    }
    // jitter ladder: retry the factorization with growing diagonal slack
    for (double jitter : {0.0, 1e-10, 1e-8, 1e-6}) {
        Eigen::MatrixXd K = kernel_;
        K.diagonal() += se2_std_ + Eigen::VectorXd::Constant(n, sn2 + jitter);
        chol_.compute(K);
        if (chol_.info() == Eigen::Success) {
            jitter_ = jitter;
            alpha_ = chol_.solve(y_std_);
            double log_det = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(chol_.matrixL()(i, i));
            lml_ = -0.5 * y_std_.dot(alpha_) - log_det -
                   0.5 * static_cast<double>(n) * std::log(2.0 * 3.14159265358979323846);
            return;
        }
    }
    throw GpError("kernel matrix factorization failed even with jitter");
}

Eigen::VectorXd GpModel::log_marginal_gradient() const {
    Eigen::Index n = X_.rows();
    Eigen::MatrixXd Kinv = chol_.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd W = alpha_ * alpha_.transpose() - Kinv;  // d(lml)/dK = W/2
    Eigen::VectorXd grad(dim_ + 2);
    for (int d = 0; d < dim_; ++d) {
        double ls = std::exp(log_ls_[static_cast<std::size_t>(d)]);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                double diff = (X_(i, d) - X_(j, d)) / ls;
                acc += W(i, j) * kernel_(i, j) * diff * diff;
            }
        }
        grad(d) = 0.5 * acc;
    }
    grad(dim_) = 0.5 * (W.array() * kernel_.array()).sum();  // d/dlog sf2: dK = K
    double sn2 = std::exp(log_sn2_);
    grad(dim_ + 1) = 0.5 * sn2 * W.trace();
    return grad;
}

GpModel GpModel::with_params(const std::vector<GpDataPoint>& points, int dim,
                             const std::vector<double>& log_lengthscales, double log_signal_var,
                             double log_noise_var) {
    if (static_cast<int>(log_lengthscales.size()) != dim) throw GpError("lengthscale count mismatch");
    GpModel m;
    m.dim_ = dim;
    Prepared p = standardize(points, dim);
    m.X_ = std::move(p.X);
    m.y_std_ = std::move(p.y);
    m.se2_std_ = std::move(p.se2);
    m.y_mean_ = p.mean;
    m.y_scale_ = p.scale;
    m.log_ls_ = log_lengthscales;
    m.log_sf2_ = log_signal_var;
    m.log_sn2_ = log_noise_var;
    m.factorize();
    return m;
}

GpModel GpModel::fit(const std::vector<GpDataPoint>& points, int dim, std::uint64_t seed) {
    if (dim < 1) throw GpError("GP fit requires at least one input dimension");
    Prepared p = standardize(points, dim);

    GpModel best;
    bool have_best = false;

    Stream rng(derive_seed(seed, "gp-fit"));
    std::vector<std::vector<double>> ls_inits;
    for (double w : {0.1, 0.3, 1.0}) ls_inits.push_back(std::vector<double>(static_cast<std::size_t>(dim), std::log(w)));
    for (int r = 0; r < 2; ++r) {
        std::vector<double> ls(static_cast<std::size_t>(dim));
        for (double& v : ls) v = std::log(0.05) + rng.next_double() * (std::log(2.0) - std::log(0.05));
        ls_inits.push_back(std::move(ls));
    }

    for (const auto& ls0 : ls_inits) {
        GpModel m;
        m.dim_ = dim;
        m.X_ = p.X;
        m.y_std_ = p.y;
        m.se2_std_ = p.se2;
        m.y_mean_ = p.mean;
        m.y_scale_ = p.scale;
        m.log_ls_ = ls0;
        m.log_sf2_ = 0.0;
        m.log_sn2_ = std::log(1e-4);
        try {
            m.factorize();
        } catch (const GpError&) {
            continue;
        }

        auto clamp_params = [&](std::vector<double>& q) {
            for (int d = 0; d < dim; ++d) q[static_cast<std::size_t>(d)] = std::clamp(q[static_cast<std::size_t>(d)], kLogLsMin, kLogLsMax);
            q[static_cast<std::size_t>(dim)] = std::clamp(q[static_cast<std::size_t>(dim)], kLogSfMin, kLogSfMax);
            q[static_cast<std::size_t>(dim) + 1] = std::clamp(q[static_cast<std::size_t>(dim) + 1], kLogSnMin, kLogSnMax);
        };
        auto get_params = [&](const GpModel& g) {
            std::vector<double> q = g.log_ls_;
            q.push_back(g.log_sf2_);
            q.push_back(g.log_sn2_);
            return q;
        };
        auto set_params = [&](GpModel& g, const std::vector<double>& q) {
            for (int d = 0; d < dim; ++d) g.log_ls_[static_cast<std::size_t>(d)] = q[static_cast<std::size_t>(d)];
            g.log_sf2_ = q[static_cast<std::size_t>(dim)];
            g.log_sn2_ = q[static_cast<std::size_t>(dim) + 1];
        };

        double step = 0.2;
        for (int iter = 0; iter < kMaxAscentSteps && step > 1e-4; ++iter) {
            Eigen::VectorXd grad = m.log_marginal_gradient();
            if (grad.norm() < 1e-6) break;
            std::vector<double> q = get_params(m);
            double base_lml = m.lml_;
            bool accepted = false;
            while (step > 1e-4) {
                std::vector<double> trial = q;
                for (int i = 0; i < grad.size(); ++i) trial[static_cast<std::size_t>(i)] += step * grad(i);
                clamp_params(trial);
                GpModel t = m;
                set_params(t, trial);
                try {
                    t.factorize();
                } catch (const GpError&) {
                    step *= 0.5;
                    continue;
                }
                if (t.lml_ > base_lml + 1e-12) {
                    m = std::move(t);
                    accepted = true;
                    step = std::min(step * 1.5, 1.0);
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }

        if (!have_best || m.lml_ > best.lml_) {
            best = std::move(m);
            have_best = true;
        }
    }
    if (!have_best) throw GpError("all GP hyperparameter restarts failed to factorize");
    return best;
}

std::pair<double, double> GpModel::posterior(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim_) throw GpError("posterior input dimension mismatch");
    Eigen::Index n = X_.rows();
    double sf2 = std::exp(log_sf2_);
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double d2 = 0.0;
        for (int d = 0; d < dim_; ++d) {
            double ls = std::exp(log_ls_[static_cast<std::size_t>(d)]);
            double diff = (X_(i, d) - x[static_cast<std::size_t>(d)]) / ls;
            d2 += diff * diff;
        }
        k(i) = sf2 * std::exp(-0.5 * d2);
    }
    double mean_std = k.dot(alpha_);
    Eigen::VectorXd v = chol_.solve(k);
    double var_std = sf2 - k.dot(v);
    if (var_std < 0.0) var_std = 0.0;
    return {y_mean_ + y_scale_ * mean_std, var_std * y_scale_ * y_scale_};
}

double GpModel::noise_variance() const {
    double base = std::exp(log_sn2_);
    double mean_se2 = se2_std_.size() > 0 ? se2_std_.mean() : 0.0;
    return (base + mean_se2) * y_scale_ * y_scale_;
}

}  // namespace cpareto
