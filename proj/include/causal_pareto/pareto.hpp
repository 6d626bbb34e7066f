#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpareto {

struct ParetoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All comparisons are under minimization: a dominates b when a <= b in every
// coordinate and a < b in at least one.
bool dominates(const std::vector<double>& a, const std::vector<double>& b);

// Indices of the maximal mutually non-dominated subset, in stable input
// order; exact duplicates keep only their first occurrence. NaN objectives
// are an input error.
std::vector<std::size_t> non_dominated_indices(const std::vector<std::vector<double>>& objectives);

struct FrontPoint {
    std::vector<double> objectives;
    std::vector<double> x;
    std::vector<double> std_error;
    std::string set_tag;
};

std::vector<FrontPoint> non_dominated_filter(const std::vector<FrontPoint>& points);

// Exact dominated hypervolume between a front and a reference point, for up
// to four objectives (two via sort-and-sweep, three and four via recursive
// slicing). Every point must strictly dominate the reference point.
double hypervolume(const std::vector<std::vector<double>>& front, const std::vector<double>& ref);

// H(archive u batch) - H(archive). Batch points that do not strictly
// dominate the reference point contribute nothing.
double hvi(const std::vector<std::vector<double>>& batch, const std::vector<std::vector<double>>& archive,
           const std::vector<double>& ref);

// HVI normalized by the dominated volume of the local front. A zero
// denominator maps to +infinity when the batch still improves, else 0.
double rhvi(const std::vector<std::vector<double>>& batch, const std::vector<std::vector<double>>& local_front,
            const std::vector<double>& ref);

double gd(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& truth);
double igd(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& truth);

struct DiversityRegions {
    std::vector<int> region_of;  // one entry per candidate
    int count = 0;
};

// Groups an approximated Pareto set by single-linkage clustering in the
// normalized input space (threshold in normalized units), merging the
// closest clusters when there are more than k_max.
DiversityRegions diversity_regions(const std::vector<std::vector<double>>& inputs_unit, int k_max = 8,
                                   double threshold = 0.1);

// Greedy hypervolume-improvement batch selection subject to the region
// balance constraint (per-region pick counts differ by at most one), with a
// swap improvement pass so no constraint-respecting single swap can raise
// the batch's HVI. Returns indices into the candidate arrays.
std::vector<std::size_t> select_local_batch(const std::vector<std::vector<double>>& candidate_x,
                                            const std::vector<std::vector<double>>& candidate_f,
                                            const DiversityRegions& regions,
                                            const std::vector<std::vector<double>>& archive,
                                            const std::vector<double>& ref, int batch_size);

}  // namespace cpareto
