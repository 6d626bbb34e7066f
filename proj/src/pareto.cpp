#include "causal_pareto/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace cpareto {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

std::vector<std::size_t> non_dominated_indices(const std::vector<std::vector<double>>& objectives) {
    std::size_t n = objectives.size();
    for (const auto& o : objectives)
        for (double v : o)
            if (std::isnan(v)) throw ParetoError("NaN objective value");
    std::vector<bool> out(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n && !out[i]; ++j) {
            if (i == j) continue;
            if (dominates(objectives[j], objectives[i]))
                out[i] = true;
            else if (objectives[j] == objectives[i] && j < i)
                out[i] = true;  // duplicates collapse onto the earliest copy
        }
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i)
        if (!out[i]) keep.push_back(i);
    return keep;
}

std::vector<FrontPoint> non_dominated_filter(const std::vector<FrontPoint>& points) {
    std::vector<std::vector<double>> objs;
    objs.reserve(points.size());
    for (const auto& p : points) objs.push_back(p.objectives);
    std::vector<FrontPoint> kept;
    for (std::size_t i : non_dominated_indices(objs)) kept.push_back(points[i]);
    return kept;
}

namespace {

double hv2(std::vector<std::vector<double>> pts, const std::vector<double>& ref) {
    // keep only the front, sorted ascending in the first objective
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double best_y = ref[1];
    for (const auto& p : pts) {
        if (p[1] < best_y) {
            area += (ref[0] - p[0]) * (best_y - p[1]);
            best_y = p[1];
        }
    }
    return area;
}

double hv_slice(std::vector<std::vector<double>> pts, std::vector<double> ref) {
    std::size_t m = ref.size();
    if (pts.empty()) return 0.0;
    if (m == 1) {
        double best = ref[0];
        for (const auto& p : pts) best = std::min(best, p[0]);
        return ref[0] - best;
    }
    if (m == 2) return hv2(std::move(pts), ref);
    std::sort(pts.begin(), pts.end(),
              [m](const auto& a, const auto& b) { return a[m - 1] < b[m - 1]; });
    double total = 0.0;
    std::vector<std::vector<double>> prefix;
    std::vector<double> sub_ref(ref.begin(), ref.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double z_lo = pts[i][m - 1];
        double z_hi = (i + 1 < pts.size()) ? pts[i + 1][m - 1] : ref[m - 1];
        prefix.emplace_back(pts[i].begin(), pts[i].end() - 1);
        if (z_hi > z_lo) total += (z_hi - z_lo) * hv_slice(prefix, sub_ref);
    }
    return total;
}

bool strictly_inside(const std::vector<double>& p, const std::vector<double>& ref) {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] < ref[i])) return false;
    return true;
}

std::vector<std::vector<double>> clip_to_box(const std::vector<std::vector<double>>& pts,
                                             const std::vector<double>& ref) {
    std::vector<std::vector<double>> kept;
    for (const auto& p : pts)
        if (strictly_inside(p, ref)) kept.push_back(p);
    return kept;
}

}  // namespace

double hypervolume(const std::vector<std::vector<double>>& front, const std::vector<double>& ref) {
    std::size_t m = ref.size();
    if (m < 1 || m > 4) throw ParetoError("hypervolume supports 1 to 4 objectives");
    for (const auto& p : front) {
        if (p.size() != m) throw ParetoError("objective dimension mismatch");
        if (!strictly_inside(p, ref))
            throw ParetoError("front point does not strictly dominate the reference point");
    }
    if (front.empty()) return 0.0;
    return hv_slice(front, ref);
}

double hvi(const std::vector<std::vector<double>>& batch, const std::vector<std::vector<double>>& archive,
           const std::vector<double>& ref) {
    for (const auto& p : batch)
        for (double v : p)
            if (std::isnan(v)) throw ParetoError("NaN objective value in batch");
    std::vector<std::vector<double>> arch = clip_to_box(archive, ref);
    std::vector<std::vector<double>> uni = arch;
    for (const auto& p : batch)
        if (strictly_inside(p, ref)) uni.push_back(p);
    double h_arch = arch.empty() ? 0.0 : hv_slice(arch, ref);
    double h_uni = uni.empty() ? 0.0 : hv_slice(uni, ref);
    double v = h_uni - h_arch;
    return v > 0 ? v : 0.0;
}

double rhvi(const std::vector<std::vector<double>>& batch, const std::vector<std::vector<double>>& local_front,
            const std::vector<double>& ref) {
    double improvement = hvi(batch, local_front, ref);
    std::vector<std::vector<double>> inside = clip_to_box(local_front, ref);
    double denom = inside.empty() ? 0.0 : hv_slice(inside, ref);
    if (denom <= 0.0) {
        if (improvement > 0.0) return std::numeric_limits<double>::infinity();
        return 0.0;
    }
    return improvement / denom;
}

namespace {

double nn_mean_distance(const std::vector<std::vector<double>>& from, const std::vector<std::vector<double>>& to) {
    if (from.empty() || to.empty()) throw ParetoError("GD/IGD fronts must be non-empty");
    double total = 0.0;
    for (const auto& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - q[i]) * (p[i] - q[i]);
            best = std::min(best, d2);
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(from.size());
}

}  // namespace

double gd(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& truth) {
    return nn_mean_distance(approx, truth);
}

double igd(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& truth) {
    return nn_mean_distance(truth, approx);
}

DiversityRegions diversity_regions(const std::vector<std::vector<double>>& inputs_unit, int k_max,
                                   double threshold) {
    std::size_t n = inputs_unit.size();
    DiversityRegions out;
    out.region_of.assign(n, 0);
    if (n == 0) return out;

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

    auto dist = [&](std::size_t a, std::size_t b) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < inputs_unit[a].size(); ++i) {
            double d = inputs_unit[a][i] - inputs_unit[b][i];
            d2 += d * d;
        }
        return std::sqrt(d2);
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (dist(a, b) <= threshold) unite(a, b);

    // merge the closest pair of clusters while over the cap
    auto cluster_count = [&]() {
        std::set<std::size_t> roots;
        for (std::size_t i = 0; i < n; ++i) roots.insert(find(i));
        return roots;
    };
    while (static_cast<int>(cluster_count().size()) > std::max(1, k_max)) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0, bb = 0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (find(a) == find(b)) continue;
                double d = dist(a, b);
                if (d < best) {
                    best = d;
                    ba = a;
                    bb = b;
                }
            }
        }
        unite(ba, bb);
    }

    // stable region ids: numbered by first appearance
    std::vector<int> id_of(n, -1);
    int next_id = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = find(i);
        if (id_of[r] < 0) id_of[r] = next_id++;
        out.region_of[i] = id_of[r];
    }
    out.count = next_id;
    return out;
}

namespace {

struct BatchState {
    std::vector<std::vector<double>> archive;  // archive clipped into the ref box
    std::vector<double> ref;

    double hv_with(const std::vector<std::vector<double>>& batch_objs) const {
        std::vector<std::vector<double>> uni = archive;
        for (const auto& p : batch_objs)
            if (strictly_inside(p, ref)) uni.push_back(p);
        if (uni.empty()) return 0.0;
        return hv_slice(uni, ref);
    }
};

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::vector<std::size_t> select_local_batch(const std::vector<std::vector<double>>& candidate_x,
                                            const std::vector<std::vector<double>>& candidate_f,
                                            const DiversityRegions& regions,
                                            const std::vector<std::vector<double>>& archive,
                                            const std::vector<double>& ref, int batch_size) {
    std::size_t n = candidate_x.size();
    if (batch_size < 1) throw ParetoError("batch size must be >= 1");
    if (candidate_f.size() != n || regions.region_of.size() != n)
        throw ParetoError("candidate arrays disagree in length");
    if (n == 0) return {};

    BatchState state{clip_to_box(archive, ref), ref};

    // candidate visiting order: lexicographic by input, for deterministic ties
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (candidate_x[a] != candidate_x[b]) return lex_less(candidate_x[a], candidate_x[b]);
        return a < b;
    });

    int k = std::max(1, regions.count);
    std::vector<int> picks_per_region(static_cast<std::size_t>(k), 0);
    std::vector<int> remaining(static_cast<std::size_t>(k), 0);
    for (int r : regions.region_of) ++remaining[static_cast<std::size_t>(r)];

    std::vector<bool> used(n, false);
    std::vector<std::size_t> chosen;
    std::vector<std::vector<double>> chosen_objs;
    std::size_t want = std::min(static_cast<std::size_t>(batch_size), n);

    auto min_open_count = [&]() {
        int lo = std::numeric_limits<int>::max();
        for (int r = 0; r < k; ++r)
            if (remaining[static_cast<std::size_t>(r)] > 0)
                lo = std::min(lo, picks_per_region[static_cast<std::size_t>(r)]);
        return lo;
    };

    while (chosen.size() < want) {
        int floor_count = min_open_count();
        double best_gain = -1.0;
        std::size_t best_idx = n;
        double base = state.hv_with(chosen_objs);
        for (std::size_t idx : order) {
            if (used[idx]) continue;
            int r = regions.region_of[idx];
            if (picks_per_region[static_cast<std::size_t>(r)] != floor_count) continue;
            std::vector<std::vector<double>> trial = chosen_objs;
            trial.push_back(candidate_f[idx]);
            double gain = state.hv_with(trial) - base;
            if (gain > best_gain + 1e-15) {
                best_gain = gain;
                best_idx = idx;
            }
        }
        if (best_idx == n) break;  // no eligible candidate left
        used[best_idx] = true;
        chosen.push_back(best_idx);
        chosen_objs.push_back(candidate_f[best_idx]);
        int r = regions.region_of[best_idx];
        ++picks_per_region[static_cast<std::size_t>(r)];
        --remaining[static_cast<std::size_t>(r)];
    }

    // swap-improvement pass: the chosen batch should not be beatable by any
    // single constraint-respecting exchange
    auto balanced_after_swap = [&](int r_out, int r_in) {
        std::vector<int> counts = picks_per_region;
        std::vector<int> rem = remaining;
        --counts[static_cast<std::size_t>(r_out)];
        ++rem[static_cast<std::size_t>(r_out)];
        ++counts[static_cast<std::size_t>(r_in)];
        --rem[static_cast<std::size_t>(r_in)];
        int mx = std::numeric_limits<int>::min(), mn = std::numeric_limits<int>::max();
        for (int r = 0; r < k; ++r) {
            if (counts[static_cast<std::size_t>(r)] == 0 && rem[static_cast<std::size_t>(r)] == 0) continue;
            mx = std::max(mx, counts[static_cast<std::size_t>(r)]);
            mn = std::min(mn, counts[static_cast<std::size_t>(r)]);
        }
        return mx - mn <= 1;
    };
    bool improved = true;
    int guard = 0;
    while (improved && guard++ < 64) {
        improved = false;
        double current = state.hv_with(chosen_objs);
        for (std::size_t ci = 0; ci < chosen.size() && !improved; ++ci) {
            for (std::size_t idx : order) {
                if (used[idx]) continue;
                int r_out = regions.region_of[chosen[ci]];
                int r_in = regions.region_of[idx];
                if (!balanced_after_swap(r_out, r_in)) continue;
                std::vector<std::vector<double>> trial = chosen_objs;
                trial[ci] = candidate_f[idx];
                if (state.hv_with(trial) > current + 1e-12) {
                    used[chosen[ci]] = false;
                    ++remaining[static_cast<std::size_t>(r_out)];
                    --picks_per_region[static_cast<std::size_t>(r_out)];
                    used[idx] = true;
                    --remaining[static_cast<std::size_t>(r_in)];
                    ++picks_per_region[static_cast<std::size_t>(r_in)];
                    chosen[ci] = idx;
                    chosen_objs[ci] = candidate_f[idx];
                    improved = true;
                    break;
                }
            }
        }
    }
    return chosen;
}

}  // namespace cpareto
