#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "causal_pareto/nsga2.hpp"
#include "causal_pareto/pareto.hpp"
#include "causal_pareto/rng.hpp"

using namespace cpareto;

namespace {

using Objs = std::vector<std::vector<double>>;

// straight double-loop oracle, independent of the library's filter
std::vector<std::size_t> oracle_front(const Objs& pts) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool beaten = false;
        for (std::size_t j = 0; j < pts.size() && !beaten; ++j) {
            if (i == j) continue;
            bool le = true, lt = false;
            for (std::size_t k = 0; k < pts[i].size(); ++k) {
                if (pts[j][k] > pts[i][k]) le = false;
                if (pts[j][k] < pts[i][k]) lt = true;
            }
            if (le && lt) beaten = true;
            if (pts[j] == pts[i] && j < i) beaten = true;
        }
        if (!beaten) keep.push_back(i);
    }
    return keep;
}

// Monte-Carlo rejection estimate of the dominated volume
double mc_hypervolume(const Objs& front, const std::vector<double>& ref, long long samples, std::uint64_t seed) {
    std::size_t m = ref.size();
    std::vector<double> lo(m, std::numeric_limits<double>::infinity());
    for (const auto& p : front)
        for (std::size_t k = 0; k < m; ++k) lo[k] = std::min(lo[k], p[k]);
    double box = 1.0;
    for (std::size_t k = 0; k < m; ++k) box *= ref[k] - lo[k];
    Stream rng(seed);
    long long hits = 0;
    std::vector<double> q(m);
    for (long long s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k < m; ++k) q[k] = rng.uniform(lo[k], ref[k]);
        for (const auto& p : front) {
            bool dom = true;
            for (std::size_t k = 0; k < m; ++k)
                if (p[k] > q[k]) {
                    dom = false;
                    break;
                }
            if (dom) {
                ++hits;
                break;
            }
        }
    }
    return box * static_cast<double>(hits) / static_cast<double>(samples);
}

Objs random_front(std::uint64_t seed, std::size_t m, std::size_t count) {
    Stream rng(seed);
    Objs pts;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> p(m);
        for (double& v : p) v = rng.uniform(0.0, 1.0);
        pts.push_back(std::move(p));
    }
    return pts;
}

}  // namespace

TEST_CASE("non-dominated filtering") {
    Objs pts = {{1, 2}, {2, 1}, {2, 2}};
    CHECK(non_dominated_indices(pts) == std::vector<std::size_t>{0, 1});

    Objs same = {{3, 3}, {3, 3}, {3, 3}};
    CHECK(non_dominated_indices(same) == std::vector<std::size_t>{0});

    CHECK(non_dominated_indices({}).empty());
    CHECK_THROWS_AS(non_dominated_indices({{std::nan("")}}), ParetoError);
}

TEST_CASE("filter matches the pairwise oracle on random points") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Objs pts = random_front(derive_seed(1, seed), 3, 200);
        CHECK(non_dominated_indices(pts) == oracle_front(pts));
    }
}

TEST_CASE("filter is idempotent and order-insensitive as a set") {
    Objs pts = random_front(9, 2, 120);
    auto keep = non_dominated_indices(pts);
    Objs front;
    for (auto i : keep) front.push_back(pts[i]);
    auto again = non_dominated_indices(front);
    CHECK(again.size() == front.size());  // already a front: nothing removed

    Objs shuffled = pts;
    Stream rng(4);
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
    auto keep2 = non_dominated_indices(shuffled);
    auto as_set = [](const Objs& all, const std::vector<std::size_t>& idx) {
        Objs out;
        for (auto i : idx) out.push_back(all[i]);
        std::sort(out.begin(), out.end());
        return out;
    };
    CHECK(as_set(pts, keep) == as_set(shuffled, keep2));
}

TEST_CASE("hypervolume basics") {
    CHECK(hypervolume({{1, 1}}, {2, 2}) == doctest::Approx(1.0));
    // frozen from the Monte-Carlo rejection oracle: union of the two
    // rectangles [0,3]x[2,3] and [2,3]x[0,3] has measure 3 + 3 - 1 = 5
    Objs two = {{0, 2}, {2, 0}};
    double exact = hypervolume(two, {3, 3});
    CHECK(exact == doctest::Approx(5.0));
    double mc = mc_hypervolume(two, {3, 3}, 2000000, 2024);
    CHECK(std::fabs(exact - mc) / exact < 0.005);

    SUBCASE("adding a dominated point changes nothing") {
        Objs three = {{0, 2}, {2, 0}, {2.5, 2.5}};
        CHECK(hypervolume(three, {3, 3}) == doctest::Approx(exact));
    }
    SUBCASE("points must dominate the reference point") {
        CHECK_THROWS_AS(hypervolume({{4, 0}}, {3, 3}), ParetoError);
        CHECK_THROWS_AS(hypervolume({{3, 0}}, {3, 3}), ParetoError);
    }
    SUBCASE("m=3 slicing matches a hand case") {
        // unit cube corner: single point at origin, ref (1,1,1)
        CHECK(hypervolume({{0, 0, 0}}, {1, 1, 1}) == doctest::Approx(1.0));
        Objs pts = {{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
        double v = hypervolume(pts, {1, 1, 1});
        double mc3 = mc_hypervolume(pts, {1, 1, 1}, 2000000, 7);
        CHECK(std::fabs(v - mc3) / v < 0.01);
    }
}

TEST_CASE("hypervolume against the rejection oracle on random fronts") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        std::size_t m = 2 + seed % 2;
        Objs pts = random_front(derive_seed(33, seed), m, 12);
        std::vector<double> ref(m, 1.1);
        auto keep = non_dominated_indices(pts);
        Objs front;
        for (auto i : keep) front.push_back(pts[i]);
        double exact = hypervolume(front, ref);
        double mc = mc_hypervolume(front, ref, 1500000, derive_seed(34, seed));
        CHECK(std::fabs(exact - mc) / exact < 0.01);
    }
}

TEST_CASE("hypervolume monotonicity") {
    Objs front = {{0.2, 0.8}, {0.5, 0.5}};
    std::vector<double> ref = {1, 1};
    double base = hypervolume(front, ref);
    Objs more = front;
    more.push_back({0.8, 0.2});  // non-dominated addition
    CHECK(hypervolume(more, ref) > base);
    Objs dominated = front;
    dominated.push_back({0.6, 0.6});
    CHECK(hypervolume(dominated, ref) == doctest::Approx(base));
}

TEST_CASE("hypervolume improvement") {
    Objs archive = {{0.5, 0.5}};
    std::vector<double> ref = {1, 1};
    CHECK(hvi({{0.7, 0.7}}, archive, ref) == doctest::Approx(0.0));  // dominated batch
    CHECK(hvi({{1, 1}}, {}, {2, 2}) == doctest::Approx(1.0));        // empty archive
    CHECK(hvi({{0.25, 0.75}}, archive, ref) == doctest::Approx(0.25 * 0.75 - 0.25 * 0.5));
    // batch points outside the reference box contribute nothing
    CHECK(hvi({{1.5, 0.1}}, archive, ref) == doctest::Approx(0.0));
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        Objs batch = random_front(derive_seed(55, seed), 2, 6);
        Objs arch = random_front(derive_seed(56, seed), 2, 10);
        double v = hvi(batch, arch, {1.1, 1.1});
        CHECK(v >= 0.0);
        Objs uni = arch;
        for (auto& p : batch) uni.push_back(p);
        double mc_u = mc_hypervolume(uni, {1.1, 1.1}, 1500000, derive_seed(57, seed));
        double mc_a = mc_hypervolume(arch, {1.1, 1.1}, 1500000, derive_seed(58, seed));
        CHECK(std::fabs(v - (mc_u - mc_a)) < 0.012);
    }
}

TEST_CASE("relative hypervolume improvement") {
    Objs front = {{0.5, 0.5}};
    std::vector<double> ref = {1, 1};
    SUBCASE("batch doubling the dominated volume gives 1") {
        // front volume 0.25; adding (0, 0.5) adds another 0.25
        CHECK(rhvi({{0.0, 0.5}}, front, ref) == doctest::Approx(1.0));
    }
    SUBCASE("dominated batch gives 0") { CHECK(rhvi({{0.9, 0.9}}, front, ref) == doctest::Approx(0.0)); }
    SUBCASE("scale invariance") {
        Objs batch = {{0.2, 0.9}, {0.8, 0.3}};
        Objs local = {{0.5, 0.5}, {0.4, 0.7}};
        double a = rhvi(batch, local, {1.2, 1.2});
        Objs batch10, local10;
        for (auto p : batch) {
            for (double& v : p) v *= 10;
            batch10.push_back(p);
        }
        for (auto p : local) {
            for (double& v : p) v *= 10;
            local10.push_back(p);
        }
        double b = rhvi(batch10, local10, {12, 12});
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    SUBCASE("zero denominator") {
        CHECK(rhvi({{0.5, 0.5}}, {}, ref) == std::numeric_limits<double>::infinity());
        CHECK(rhvi({{2, 2}}, {}, ref) == 0.0);
    }
}

TEST_CASE("GD and IGD") {
    Objs a = {{0, 0}, {1, 1}};
    CHECK(gd(a, a) == doctest::Approx(0.0));
    CHECK(igd(a, a) == doctest::Approx(0.0));

    Objs truth = {{0, 0}, {1, 1}, {2, 2}};
    Objs approx = {{0, 0}, {1, 1}};
    CHECK(gd(approx, truth) == doctest::Approx(0.0));
    CHECK(igd(approx, truth) > 0.0);

    // singleton vs two points at distances 1 and 3
    Objs single = {{0, 0}};
    Objs pair = {{1, 0}, {3, 0}};
    CHECK(gd(single, pair) == doctest::Approx(1.0));
    CHECK(igd(single, pair) == doctest::Approx(2.0));

    SUBCASE("translation invariance") {
        Objs t1, t2;
        for (auto p : approx) {
            p[0] += 5;
            p[1] -= 2;
            t1.push_back(p);
        }
        for (auto p : truth) {
            p[0] += 5;
            p[1] -= 2;
            t2.push_back(p);
        }
        CHECK(gd(t1, t2) == doctest::Approx(gd(approx, truth)));
        CHECK(igd(t1, t2) == doctest::Approx(igd(approx, truth)));
    }
    SUBCASE("empty fronts are an input error") {
        CHECK_THROWS_AS(gd({}, truth), ParetoError);
        CHECK_THROWS_AS(igd(approx, {}), ParetoError);
    }
}

TEST_CASE("diversity regions") {
    SUBCASE("one tight cluster") {
        std::vector<std::vector<double>> xs = {{0.1, 0.1}, {0.15, 0.12}, {0.12, 0.18}};
        DiversityRegions r = diversity_regions(xs);
        CHECK(r.count == 1);
    }
    SUBCASE("two islands") {
        std::vector<std::vector<double>> xs = {{0.1, 0.1}, {0.12, 0.1}, {0.9, 0.9}, {0.88, 0.92}};
        DiversityRegions r = diversity_regions(xs);
        CHECK(r.count == 2);
        CHECK(r.region_of[0] == r.region_of[1]);
        CHECK(r.region_of[2] == r.region_of[3]);
        CHECK(r.region_of[0] != r.region_of[2]);
    }
    SUBCASE("capped at k_max") {
        std::vector<std::vector<double>> xs;
        for (int i = 0; i < 12; ++i) xs.push_back({static_cast<double>(i) / 11.0});
        DiversityRegions r = diversity_regions(xs, 3, 0.01);
        CHECK(r.count <= 3);
    }
    SUBCASE("regions never outnumber points") {
        std::vector<std::vector<double>> xs = {{0.0}, {0.5}, {1.0}};
        DiversityRegions r = diversity_regions(xs, 8, 0.001);
        CHECK(r.count <= 3);
    }
}

TEST_CASE("batch selection") {
    std::vector<double> ref = {1, 1};
    SUBCASE("B=1 picks the max-HVI candidate") {
        std::vector<std::vector<double>> xs = {{0.1}, {0.5}, {0.9}};
        std::vector<std::vector<double>> fs = {{0.8, 0.8}, {0.2, 0.2}, {0.6, 0.9}};
        DiversityRegions r;
        r.region_of = {0, 0, 0};
        r.count = 1;
        auto picks = select_local_batch(xs, fs, r, {}, ref, 1);
        REQUIRE(picks.size() == 1);
        CHECK(picks[0] == 1);
    }
    SUBCASE("two regions, B=4: two picks per region") {
        std::vector<std::vector<double>> xs, fs;
        for (int i = 0; i < 4; ++i) {
            xs.push_back({0.1 + 0.01 * i});
            fs.push_back({0.1 + 0.2 * i, 0.9 - 0.2 * i});
        }
        for (int i = 0; i < 4; ++i) {
            xs.push_back({0.9 - 0.01 * i});
            fs.push_back({0.15 + 0.2 * i, 0.85 - 0.2 * i});
        }
        DiversityRegions r;
        r.region_of = {0, 0, 0, 0, 1, 1, 1, 1};
        r.count = 2;
        auto picks = select_local_batch(xs, fs, r, {}, ref, 4);
        REQUIRE(picks.size() == 4);
        int in_first = 0;
        for (auto p : picks)
            if (r.region_of[p] == 0) ++in_first;
        CHECK(in_first == 2);
    }
    SUBCASE("fewer candidates than B returns all") {
        std::vector<std::vector<double>> xs = {{0.3}, {0.6}};
        std::vector<std::vector<double>> fs = {{0.3, 0.6}, {0.6, 0.3}};
        DiversityRegions r;
        r.region_of = {0, 0};
        r.count = 1;
        auto picks = select_local_batch(xs, fs, r, {}, ref, 5);
        CHECK(picks.size() == 2);
    }
    SUBCASE("no single constraint-respecting swap improves the batch") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            Stream rng(derive_seed(202, seed));
            std::vector<std::vector<double>> xs, fs;
            int n = 12;
            for (int i = 0; i < n; ++i) {
                xs.push_back({rng.next_double(), rng.next_double()});
                fs.push_back({rng.next_double(), rng.next_double()});
            }
            DiversityRegions r = diversity_regions(xs, 3, 0.25);
            std::vector<std::vector<double>> archive = {{0.7, 0.7}};
            int b = 4;
            auto picks = select_local_batch(xs, fs, r, archive, ref, b);
            REQUIRE(static_cast<int>(picks.size()) == b);

            auto batch_value = [&](const std::vector<std::size_t>& batch) {
                std::vector<std::vector<double>> objs;
                for (auto i : batch) objs.push_back(fs[i]);
                return hvi(objs, archive, ref);
            };
            auto counts_of = [&](const std::vector<std::size_t>& batch) {
                std::vector<int> c(static_cast<std::size_t>(r.count), 0);
                for (auto i : batch) ++c[static_cast<std::size_t>(r.region_of[i])];
                return c;
            };
            auto balanced = [&](const std::vector<int>& c) {
                // judged over regions that still hold candidates
                std::vector<int> total(static_cast<std::size_t>(r.count), 0);
                for (int reg : r.region_of) ++total[static_cast<std::size_t>(reg)];
                int mx = std::numeric_limits<int>::min(), mn = std::numeric_limits<int>::max();
                for (int reg = 0; reg < r.count; ++reg) {
                    if (total[static_cast<std::size_t>(reg)] == 0) continue;
                    mx = std::max(mx, c[static_cast<std::size_t>(reg)]);
                    mn = std::min(mn, c[static_cast<std::size_t>(reg)]);
                }
                return mx - mn <= 1;
            };
            CHECK(balanced(counts_of(picks)));
            double chosen_value = batch_value(picks);
            for (std::size_t out = 0; out < picks.size(); ++out) {
                for (std::size_t in = 0; in < static_cast<std::size_t>(n); ++in) {
                    if (std::find(picks.begin(), picks.end(), in) != picks.end()) continue;
                    auto alt = picks;
                    alt[out] = in;
                    if (!balanced(counts_of(alt))) continue;
                    CHECK(batch_value(alt) <= chosen_value + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("front discovery") {
    SUBCASE("single objective collapses to minimization") {
        auto obj = [](const std::vector<double>& x) {
            return std::vector<double>{(x[0] - 0.3) * (x[0] - 0.3)};
        };
        FrontApprox fa = discover_front(obj, 1, 60, 40, 5);
        REQUIRE(fa.inputs.size() == 1);
        CHECK(fa.inputs[0][0] == doctest::Approx(0.3).epsilon(0.05));
    }
    SUBCASE("two conflicting linear objectives span the front") {
        auto obj = [](const std::vector<double>& x) { return std::vector<double>{x[0], 1.0 - x[0]}; };
        FrontApprox fa = discover_front(obj, 1, 100, 50, 7);
        double lo = 1.0, hi = 0.0;
        for (const auto& f : fa.values) {
            lo = std::min(lo, f[0]);
            hi = std::max(hi, f[0]);
        }
        CHECK(hi - lo >= 0.9);
    }
    SUBCASE("convex bi-objective quadratic lands on the segment between optima") {
        std::vector<double> a = {0.2, 0.2}, b = {0.8, 0.8};
        auto obj = [&](const std::vector<double>& x) {
            double f1 = 0, f2 = 0;
            for (std::size_t d = 0; d < 2; ++d) {
                f1 += (x[d] - a[d]) * (x[d] - a[d]);
                f2 += (x[d] - b[d]) * (x[d] - b[d]);
            }
            return std::vector<double>{f1, f2};
        };
        FrontApprox fa = discover_front(obj, 2, 120, 120, 11);
        REQUIRE(!fa.inputs.empty());
        for (const auto& x : fa.inputs) {
            // distance from x to the segment a-b
            double t = ((x[0] - a[0]) * (b[0] - a[0]) + (x[1] - a[1]) * (b[1] - a[1])) /
                       ((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]));
            t = std::clamp(t, 0.0, 1.0);
            double px = a[0] + t * (b[0] - a[0]);
            double py = a[1] + t * (b[1] - a[1]);
            double dist = std::sqrt((x[0] - px) * (x[0] - px) + (x[1] - py) * (x[1] - py));
            CHECK(dist <= 1e-2);
        }
    }
    SUBCASE("deterministic given the seed") {
        auto obj = [](const std::vector<double>& x) { return std::vector<double>{x[0], 1.0 - x[0]}; };
        FrontApprox a1 = discover_front(obj, 1, 40, 20, 99);
        FrontApprox a2 = discover_front(obj, 1, 40, 20, 99);
        CHECK(a1.inputs == a2.inputs);
        CHECK(a1.values == a2.values);
    }
}
