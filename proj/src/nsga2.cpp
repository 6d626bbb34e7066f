#include "causal_pareto/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "causal_pareto/pareto.hpp"
#include "causal_pareto/rng.hpp"

namespace cpareto {

namespace {

constexpr double kCrossoverEta = 15.0;
constexpr double kMutationEta = 20.0;
constexpr double kCrossoverProb = 0.9;

struct Individual {
    std::vector<double> x;
    std::vector<double> f;
    int rank = 0;
    double crowding = 0.0;
};

void fast_nondominated_sort(std::vector<Individual>& pop) {
    std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> dom_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(pop[i].f, pop[j].f)) dominated[i].push_back(j);
            else if (dominates(pop[j].f, pop[i].f)) ++dom_count[i];
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dom_count[i] == 0) {
            pop[i].rank = 0;
            current.push_back(i);
        }
    int rank = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            for (std::size_t j : dominated[i]) {
                if (--dom_count[j] == 0) {
                    pop[j].rank = rank + 1;
                    next.push_back(j);
                }
            }
        }
        ++rank;
        current = std::move(next);
    }
}

void assign_crowding(std::vector<Individual>& pop) {
    std::size_t n = pop.size();
    if (n == 0) return;
    std::size_t m = pop[0].f.size();
    for (auto& ind : pop) ind.crowding = 0.0;
    int max_rank = 0;
    for (const auto& ind : pop) max_rank = std::max(max_rank, ind.rank);
    for (int r = 0; r <= max_rank; ++r) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (pop[i].rank == r) members.push_back(i);
        if (members.empty()) continue;
        for (std::size_t obj = 0; obj < m; ++obj) {
            std::sort(members.begin(), members.end(),
                      [&](std::size_t a, std::size_t b) { return pop[a].f[obj] < pop[b].f[obj]; });
            double lo = pop[members.front()].f[obj];
            double hi = pop[members.back()].f[obj];
            pop[members.front()].crowding = std::numeric_limits<double>::infinity();
            pop[members.back()].crowding = std::numeric_limits<double>::infinity();
            if (hi - lo <= 0) continue;
            for (std::size_t k = 1; k + 1 < members.size(); ++k)
                pop[members[k]].crowding += (pop[members[k + 1]].f[obj] - pop[members[k - 1]].f[obj]) / (hi - lo);
        }
    }
}

bool crowded_less(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
}

double sbx_child(double p1, double p2, Stream& rng) {
    double u = rng.next_double();
    double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (kCrossoverEta + 1.0))
                           : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (kCrossoverEta + 1.0));
    double c = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2);
    return std::clamp(c, 0.0, 1.0);
}

void mutate(std::vector<double>& x, Stream& rng) {
    double pm = 1.0 / static_cast<double>(x.size());
    for (double& v : x) {
        if (rng.next_double() >= pm) continue;
        double u = rng.next_double();
        double delta = u < 0.5 ? std::pow(2.0 * u, 1.0 / (kMutationEta + 1.0)) - 1.0
                               : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (kMutationEta + 1.0));
        v = std::clamp(v + delta, 0.0, 1.0);
    }
}

}  // namespace

FrontApprox discover_front(const std::function<std::vector<double>(const std::vector<double>&)>& objective,
                           int dim, int population, int generations, std::uint64_t seed) {
    if (dim < 1) throw ParetoError("discover_front requires at least one input dimension");
    if (population < 4) population = 4;
    population += population % 2;
    Stream rng(derive_seed(seed, "nsga2"));

    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) {
        Individual ind;
        ind.x.resize(static_cast<std::size_t>(dim));
        for (double& v : ind.x) v = rng.next_double();
        ind.f = objective(ind.x);
        pop.push_back(std::move(ind));
    }
    fast_nondominated_sort(pop);
    assign_crowding(pop);

    for (int gen = 0; gen < generations; ++gen) {
        auto tournament = [&]() -> const Individual& {
            std::size_t a = static_cast<std::size_t>(rng.next_u64() % pop.size());
            std::size_t b = static_cast<std::size_t>(rng.next_u64() % pop.size());
            return crowded_less(pop[a], pop[b]) ? pop[a] : pop[b];
        };
        std::vector<Individual> offspring;
        offspring.reserve(pop.size());
        while (offspring.size() < pop.size()) {
            const Individual& p1 = tournament();
            const Individual& p2 = tournament();
            Individual c1, c2;
            c1.x.resize(static_cast<std::size_t>(dim));
            c2.x.resize(static_cast<std::size_t>(dim));
            bool cross = rng.next_double() < kCrossoverProb;
            for (int d = 0; d < dim; ++d) {
                std::size_t dd = static_cast<std::size_t>(d);
                if (cross && rng.next_double() < 0.5) {
                    c1.x[dd] = sbx_child(p1.x[dd], p2.x[dd], rng);
                    c2.x[dd] = sbx_child(p2.x[dd], p1.x[dd], rng);
                } else {
                    c1.x[dd] = p1.x[dd];
                    c2.x[dd] = p2.x[dd];
                }
            }
            mutate(c1.x, rng);
            mutate(c2.x, rng);
            c1.f = objective(c1.x);
            c2.f = objective(c2.x);
            offspring.push_back(std::move(c1));
            if (offspring.size() < pop.size()) offspring.push_back(std::move(c2));
        }
        for (auto& ind : offspring) pop.push_back(std::move(ind));
        fast_nondominated_sort(pop);
        assign_crowding(pop);
        std::stable_sort(pop.begin(), pop.end(), crowded_less);
        pop.resize(static_cast<std::size_t>(population));
    }

    // Local pattern-search polish. Crowding-based elitism leaves survivors a
    // mutation step away from the attained front (no population member falls
    // inside their narrow domination window), so each survivor is pushed
    // downhill along axis and diagonal directions while both objectives
    // still improve.
    std::vector<std::vector<double>> dirs;
    for (int d = 0; d < dim; ++d) {
        std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
        e[static_cast<std::size_t>(d)] = 1.0;
        dirs.push_back(e);
        e[static_cast<std::size_t>(d)] = -1.0;
        dirs.push_back(e);
    }
    for (int d0 = 0; d0 < dim; ++d0) {
        for (int d1 = d0 + 1; d1 < dim; ++d1) {
            for (double s0 : {1.0, -1.0}) {
                for (double s1 : {1.0, -1.0}) {
                    std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
                    e[static_cast<std::size_t>(d0)] = s0 * 0.7071067811865476;
                    e[static_cast<std::size_t>(d1)] = s1 * 0.7071067811865476;
                    dirs.push_back(e);
                }
            }
        }
    }
    auto weakly_improves = [](const std::vector<double>& cand, const std::vector<double>& base) {
        bool strict = false;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (cand[i] > base[i]) return false;
            if (cand[i] < base[i]) strict = true;
        }
        return strict;
    };
    for (auto& ind : pop) {
        double h = 0.05;
        int accepted = 0;
        while (h >= 1e-4 && accepted < 200) {
            bool moved = false;
            for (const auto& dir : dirs) {
                std::vector<double> x = ind.x;
                for (int d = 0; d < dim; ++d)
                    x[static_cast<std::size_t>(d)] =
                        std::clamp(x[static_cast<std::size_t>(d)] + h * dir[static_cast<std::size_t>(d)], 0.0, 1.0);
                if (x == ind.x) continue;
                std::vector<double> f = objective(x);
                if (weakly_improves(f, ind.f)) {
                    ind.x = std::move(x);
                    ind.f = std::move(f);
                    moved = true;
                    ++accepted;
                    break;
                }
            }
            if (!moved) h *= 0.5;
        }
    }

    // final non-dominated subset, deduplicated by input
    std::vector<std::vector<double>> objs;
    for (const auto& ind : pop) objs.push_back(ind.f);
    FrontApprox out;
    for (std::size_t i : non_dominated_indices(objs)) {
        bool dup = false;
        for (const auto& x : out.inputs)
            if (x == pop[i].x) dup = true;
        if (dup) continue;
        out.inputs.push_back(pop[i].x);
        out.values.push_back(pop[i].f);
    }
    return out;
}

}  // namespace cpareto
