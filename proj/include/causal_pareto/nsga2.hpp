#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace cpareto {

struct FrontApprox {
    std::vector<std::vector<double>> inputs;   // unit-cube coordinates
    std::vector<std::vector<double>> values;   // objective vectors
};

// Evolutionary Pareto discovery over a vector-valued objective on the unit
// cube: non-dominated sorting with crowding distance, simulated binary
// crossover and polynomial mutation. Returns the deduplicated non-dominated
// subset of the final population; deterministic given the seed.
FrontApprox discover_front(const std::function<std::vector<double>(const std::vector<double>&)>& objective,
                           int dim, int population, int generations, std::uint64_t seed);

}  // namespace cpareto
