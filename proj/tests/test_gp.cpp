#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "causal_pareto/gp.hpp"
#include "causal_pareto/rng.hpp"

using namespace cpareto;

namespace {

std::vector<GpDataPoint> random_points(std::uint64_t seed, int n, int dim, double noise) {
    Stream rng(seed);
    std::vector<GpDataPoint> pts;
    for (int i = 0; i < n; ++i) {
        GpDataPoint p;
        for (int d = 0; d < dim; ++d) p.x.push_back(rng.next_double());
        p.y = std::sin(3.0 * p.x[0]) + (dim > 1 ? 0.5 * p.x[1] : 0.0) + noise * rng.gaussian();
        p.std_error = noise;
        pts.push_back(std::move(p));
    }
    return pts;
}

// direct textbook implementation of GP prediction, used as an oracle
std::pair<double, double> oracle_predict(const std::vector<GpDataPoint>& pts, const std::vector<double>& x,
                                         const std::vector<double>& ls, double sf2, double sn2) {
    int n = static_cast<int>(pts.size());
    int d = static_cast<int>(x.size());
    double mean_y = 0.0;
    for (const auto& p : pts) mean_y += p.y;
    mean_y /= n;
    double var_y = 0.0;
    for (const auto& p : pts) var_y += (p.y - mean_y) * (p.y - mean_y);
    var_y = n > 1 ? var_y / (n - 1) : 0.0;
    double scale = var_y > 0 ? std::sqrt(var_y) : 1.0;

    auto kern = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double d2 = 0.0;
        for (int k = 0; k < d; ++k) {
            double diff = (a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) / ls[static_cast<std::size_t>(k)];
            d2 += diff * diff;
        }
        return sf2 * std::exp(-0.5 * d2);
    };
    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd y(n), kstar(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) K(i, j) = kern(pts[static_cast<std::size_t>(i)].x, pts[static_cast<std::size_t>(j)].x);
        double se = pts[static_cast<std::size_t>(i)].std_error / scale;
        K(i, i) += sn2 + se * se;
        y(i) = (pts[static_cast<std::size_t>(i)].y - mean_y) / scale;
        kstar(i) = kern(pts[static_cast<std::size_t>(i)].x, x);
    }
    Eigen::VectorXd alpha = K.fullPivLu().solve(y);
    double mu = kstar.dot(alpha);
    double var = sf2 - kstar.dot(K.fullPivLu().solve(kstar));
    return {mean_y + scale * mu, std::max(0.0, var) * scale * scale};
}

}  // namespace

TEST_CASE("single point interpolates") {
    std::vector<GpDataPoint> pts = {{{0.5}, 2.5, 0.0}};
    GpModel m = GpModel::fit(pts, 1, 1);
    auto [mean, var] = m.posterior({0.5});
    CHECK(std::fabs(mean - 2.5) < 1e-6);
    CHECK(var >= 0.0);
}

TEST_CASE("interpolation at the noise floor") {
    std::vector<GpDataPoint> pts;
    for (int i = 0; i < 8; ++i) {
        double x = i / 7.0;
        pts.push_back({{x}, std::sin(3.0 * x), 0.0});
    }
    GpModel m = GpModel::with_params(pts, 1, {std::log(0.3)}, std::log(1.0), std::log(1e-8));
    for (const auto& p : pts) {
        auto [mean, var] = m.posterior(p.x);
        CHECK(std::fabs(mean - p.y) <= 1e-5);
        CHECK(var >= 0.0);
    }
}

TEST_CASE("noise-free linear function is recovered between points") {
    std::vector<GpDataPoint> pts;
    for (int i = 0; i < 8; ++i) {
        double x = i / 7.0;
        pts.push_back({{x}, 2.0 * x - 0.5, 0.0});
    }
    GpModel m = GpModel::with_params(pts, 1, {std::log(0.5)}, std::log(1.0), std::log(1e-10));
    for (double x : {0.1, 0.35, 0.62, 0.9}) {
        auto oracle = oracle_predict(pts, {x}, {0.5}, 1.0, 1e-10);
        auto [mean, var] = m.posterior({x});
        CHECK(std::fabs(mean - (2.0 * x - 0.5)) < 1e-3);
        CHECK(std::fabs(mean - oracle.first) < 1e-8);
        CHECK(std::fabs(var - oracle.second) < 1e-8);
    }
}

TEST_CASE("posterior matches the textbook formulas on random instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        int dim = 1 + static_cast<int>(seed % 2);
        auto pts = random_points(derive_seed(17, seed), 5, dim, 0.05);
        std::vector<double> ls(static_cast<std::size_t>(dim), 0.4);
        GpModel m = GpModel::with_params(pts, dim, std::vector<double>(static_cast<std::size_t>(dim), std::log(0.4)),
                                         std::log(0.8), std::log(1e-4));
        Stream rng(derive_seed(18, seed));
        for (int t = 0; t < 4; ++t) {
            std::vector<double> x;
            for (int d = 0; d < dim; ++d) x.push_back(rng.next_double());
            auto oracle = oracle_predict(pts, x, ls, 0.8, 1e-4);
            auto [mean, var] = m.posterior(x);
            CHECK(std::fabs(mean - oracle.first) < 1e-8);
            CHECK(std::fabs(var - oracle.second) < 1e-8);
        }
    }
}

TEST_CASE("far from the data the posterior reverts to the prior") {
    std::vector<GpDataPoint> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({{0.01 * i}, 5.0 + 0.1 * i, 0.0});
    GpModel m = GpModel::with_params(pts, 1, {std::log(0.02)}, std::log(1.0), std::log(1e-6));
    auto [mean, var] = m.posterior({0.9});  // dozens of lengthscales away
    double data_mean = 0.0;
    for (const auto& p : pts) data_mean += p.y;
    data_mean /= static_cast<double>(pts.size());
    double y_var = 0.0;
    for (const auto& p : pts) y_var += (p.y - data_mean) * (p.y - data_mean);
    y_var /= static_cast<double>(pts.size() - 1);
    CHECK(std::fabs(mean - data_mean) < 0.01 * std::fabs(data_mean));
    CHECK(std::fabs(var - 1.0 * y_var) < 0.01 * y_var);  // sf2 = 1 in standardized units
}

TEST_CASE("marginal likelihood gradient matches central finite differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        int dim = 1 + static_cast<int>(seed % 3);
        auto pts = random_points(derive_seed(23, seed), 6 + static_cast<int>(seed % 4), dim, 0.1);
        Stream rng(derive_seed(24, seed));
        std::vector<double> ls;
        for (int d = 0; d < dim; ++d) ls.push_back(std::log(0.2 + 0.6 * rng.next_double()));
        double lsf = std::log(0.5 + rng.next_double());
        double lsn = std::log(1e-3 + 1e-2 * rng.next_double());
        GpModel m = GpModel::with_params(pts, dim, ls, lsf, lsn);
        Eigen::VectorXd grad = m.log_marginal_gradient();
        double h = 1e-5;
        for (int k = 0; k < dim + 2; ++k) {
            auto shifted = [&](double delta) {
                std::vector<double> ls2 = ls;
                double lsf2 = lsf, lsn2 = lsn;
                if (k < dim) ls2[static_cast<std::size_t>(k)] += delta;
                else if (k == dim) lsf2 += delta;
                else lsn2 += delta;
                return GpModel::with_params(pts, dim, ls2, lsf2, lsn2).log_marginal();
            };
            double fd = (shifted(h) - shifted(-h)) / (2 * h);
            double denom = std::max({std::fabs(fd), std::fabs(grad(k)), 1e-8});
            CHECK(std::fabs(grad(k) - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("standardization invariance: shifting targets shifts means") {
    auto pts = random_points(42, 7, 1, 0.02);
    GpModel a = GpModel::fit(pts, 1, 3);
    auto shifted_pts = pts;
    for (auto& p : shifted_pts) p.y += 100.0;
    GpModel b = GpModel::fit(shifted_pts, 1, 3);
    for (double x : {0.2, 0.5, 0.8}) {
        auto [ma, va] = a.posterior({x});
        auto [mb, vb] = b.posterior({x});
        CHECK(std::fabs((mb - ma) - 100.0) < 1e-6);
        CHECK(std::fabs(vb - va) < 1e-6);
    }
}

TEST_CASE("fit recovers a smooth function from noise-free samples") {
    std::vector<GpDataPoint> pts;
    for (int i = 0; i < 12; ++i) {
        double x = i / 11.0;
        pts.push_back({{x}, 2.0 * x - 0.5, 0.0});
    }
    GpModel m = GpModel::fit(pts, 1, 7);
    for (double x : {0.15, 0.48, 0.83}) {
        auto [mean, var] = m.posterior({x});
        CHECK(std::fabs(mean - (2.0 * x - 0.5)) < 1e-3);
    }
}

TEST_CASE("fit is deterministic given the seed") {
    auto pts = random_points(5, 9, 2, 0.05);
    GpModel a = GpModel::fit(pts, 2, 11);
    GpModel b = GpModel::fit(pts, 2, 11);
    auto [ma, va] = a.posterior({0.4, 0.6});
    auto [mb, vb] = b.posterior({0.4, 0.6});
    CHECK(ma == mb);
    CHECK(va == vb);
}

TEST_CASE("degenerate inputs are absorbed by the noise term") {
    std::vector<GpDataPoint> pts = {{{0.5}, 1.0, 0.0}, {{0.5}, 2.0, 0.0}, {{0.2}, 0.5, 0.0}};
    GpModel m = GpModel::fit(pts, 1, 1);  // duplicate x with contradictory y
    auto [mean, var] = m.posterior({0.5});
    CHECK(std::isfinite(mean));
    CHECK(var >= 0.0);
    CHECK_THROWS_AS(GpModel::fit({{{0.1}, std::nan(""), 0.0}}, 1, 1), GpError);
}
