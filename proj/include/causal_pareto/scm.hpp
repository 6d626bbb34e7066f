#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causal_pareto/expr.hpp"
#include "causal_pareto/graph.hpp"

namespace cpareto {

struct ScmError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExogenousSpec {
    enum class Kind { kGaussian, kTruncatedGaussian, kUniform, kBernoulli };
    std::string name;
    Kind kind = Kind::kGaussian;
    double mean = 0.0, stddev = 1.0;  // gaussian / truncated
    double lo = 0.0, hi = 1.0;        // truncation bounds / uniform bounds
    double p = 0.5;                   // bernoulli
    double value0 = -1.0, value1 = 1.0;

    bool operator==(const ExogenousSpec&) const = default;
};

struct StructuralEquation {
    std::string variable;
    std::string text;  // canonical form
    Expr expr;
    std::vector<std::string> endo_refs;  // names of referenced endogenous variables
    std::vector<std::string> exo_refs;
    int line = 0;
};

// Executable structural causal model: the ground-truth system the optimizer
// intervenes on. Bidirected edges in the graph view correspond one-to-one to
// exogenous variables shared between two structural equations.
struct ScmSpec {
    CausalGraph graph;
    std::vector<StructuralEquation> equations;  // one per endogenous variable, vertex order
    std::vector<ExogenousSpec> exogenous;       // name-sorted
    std::map<std::string, std::pair<double, double>> domains;  // treatment -> closed interval
    std::string header_comment;

    std::vector<std::string> target_names() const { return graph.to_names(graph.targets()); }
    const ExogenousSpec& exogenous_by_name(const std::string& name) const;
};

ScmSpec parse_scm(const std::string& text);
std::string serialize_scm(const ScmSpec& spec);
bool operator==(const ScmSpec& a, const ScmSpec& b);

// ((X_s, x_s)): values aligned with the name-sorted member order.
struct InterventionAssignment {
    std::vector<std::string> variables;  // sorted
    std::vector<double> values;

    static InterventionAssignment make(std::vector<std::pair<std::string, double>> pairs);
    std::string to_string() const;
};

// Estimated target means for one intervention.
struct MuVector {
    std::vector<double> means;
    std::vector<double> std_error;
    int mc_samples = 0;
};

struct SampleMatrix {
    std::vector<std::string> columns;   // endogenous names, sorted
    std::vector<double> values;         // row-major, n x columns
    int rows = 0;

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * columns.size() + col]; }
};

// n i.i.d. draws of every endogenous variable under do(intervention).
// Exogenous draws are keyed by (seed, row, variable name), so the same seed
// reproduces the same draws regardless of which equations get evaluated.
SampleMatrix simulate(const ScmSpec& spec, const InterventionAssignment& iv, int n, std::uint64_t seed);

MuVector interventional_mean(const ScmSpec& spec, const InterventionAssignment& iv, int n, std::uint64_t seed);

// Validates that the assignment intervenes only on treatments and stays
// inside the declared domains. Throws ScmError otherwise.
void validate_intervention(const ScmSpec& spec, const InterventionAssignment& iv);

ScmSpec builtin_problem(const std::string& name);  // synthetic1 | synthetic2 | health
const std::string& builtin_spec_text(const std::string& name);
std::vector<std::string> builtin_problem_names();

struct GroundTruthPoint {
    std::string set_tag;            // comma-joined sorted member names; "{}" for the empty set
    std::vector<double> x;
    std::vector<double> objectives;
    std::vector<double> std_error;
};

struct GroundTruthFront {
    std::vector<std::string> objective_names;
    std::vector<GroundTruthPoint> points;  // mutually non-dominated
    int grid_per_dim = 0;
    int mc_samples = 0;
};

// Regular-grid evaluation of every provided intervention set, pooled and
// filtered to the non-dominated subset. All evaluations share one derived
// seed so identical assignments produce bit-identical estimates across sets.
GroundTruthFront ground_truth_front(const ScmSpec& spec, const std::vector<std::vector<std::string>>& sets,
                                    int grid_per_dim, int n_mc, std::uint64_t seed, int threads = 1);

}  // namespace cpareto
