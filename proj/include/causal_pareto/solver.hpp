#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "causal_pareto/gp.hpp"
#include "causal_pareto/nsga2.hpp"
#include "causal_pareto/pareto.hpp"
#include "causal_pareto/scm.hpp"

namespace cpareto {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    enum class SetsMode { kPomis, kAllSubsets, kExplicit };
    SetsMode sets_mode = SetsMode::kPomis;
    std::vector<std::vector<std::string>> explicit_sets;
    int k_init = 5;
    int batch_size = 5;
    int iterations = 0;
    int mc_samples = 10000;
    std::uint64_t seed = 0;
    int front_population = 100;
    int front_generations = 50;
    int threads = 1;
    std::string checkpoint_dir;  // empty disables checkpoints
};

struct InterventionRecord {
    int set_index = 0;
    std::vector<double> x;  // domain units, aligned with the set's sorted members
    std::vector<double> mu;
    std::vector<double> std_error;
};

struct IterationEntry {
    int iteration = 0;  // 1-based
    int chosen_set = 0;
    double rhvi_value = 0.0;
    std::vector<double> rhvi_all;  // per-set values behind the argmax
    std::vector<std::vector<double>> batch_x;
    std::vector<std::vector<double>> batch_mu;
    long long interventions_cum = 0;
    double gd = std::numeric_limits<double>::quiet_NaN();
    double igd = std::numeric_limits<double>::quiet_NaN();
};

struct RunReport {
    std::uint64_t seed = 0;
    std::vector<std::string> set_names;
    std::vector<std::string> objective_names;
    std::vector<InterventionRecord> records;  // evaluation order
    std::vector<IterationEntry> iterations;   // length = N
    double initial_gd = std::numeric_limits<double>::quiet_NaN();
    double initial_igd = std::numeric_limits<double>::quiet_NaN();
    long long initial_interventions = 0;
    long long total_evaluations = 0;
    long long total_interventions = 0;
    std::vector<FrontPoint> final_front;  // causal Pareto set/front with origins
};

std::string report_to_json(const RunReport& report);

// One local multi-objective problem: a single intervention set, its per-
// objective surrogates and its current front approximation.
struct LocalProblem {
    std::vector<std::string> variables;  // sorted
    std::string tag;
    std::vector<std::pair<double, double>> bounds;
    std::vector<std::size_t> record_idx;
    std::vector<GpModel> models;  // one per objective; empty for 0-dim sets
    FrontApprox approx;           // unit-cube inputs, posterior-mean objectives
    DiversityRegions regions;
    int fit_epoch = -1;  // number of (re)fits performed minus one
};

using EvalFn = std::function<MuVector(const InterventionAssignment&, int, std::uint64_t)>;

// Surrogate-driven batch optimizer over a family of intervention sets,
// arbitrating exploration by relative hypervolume improvement per iteration.
class Solver {
  public:
    Solver(ScmSpec spec, SolverConfig config, EvalFn evaluate = {});

    void set_reference_front(std::vector<std::vector<double>> reference);

    void initialize();
    void step();  // throws on evaluation failure, leaving the state unchanged

    RunReport make_report() const;
    std::vector<FrontPoint> extract_causal_front() const;

    // state inspection (used by tests and the runner)
    bool initialized() const { return initialized_; }
    int iterations_done() const { return static_cast<int>(log_.size()); }
    const std::vector<LocalProblem>& locals() const { return locals_; }
    const std::vector<InterventionRecord>& records() const { return records_; }
    std::vector<std::vector<double>> evaluated_front(int set_index) const;
    std::vector<double> shared_reference_point() const;

    std::string checkpoint_json() const;
    static Solver resume(ScmSpec spec, SolverConfig config, const std::string& checkpoint,
                         EvalFn evaluate = {});

    static RunReport run(const ScmSpec& spec, const SolverConfig& config,
                         const std::vector<std::vector<double>>* reference = nullptr, EvalFn evaluate = {});

  private:
    void resolve_sets();
    MuVector evaluate_assignment(const InterventionAssignment& iv, std::uint64_t seed) const;
    void refit_local(int set_index);
    void rediscover_local(int set_index);
    InterventionAssignment assignment_for(int set_index, const std::vector<double>& unit_x,
                                          std::vector<double>* domain_x) const;
    void write_checkpoint() const;
    void metrics_now(double* gd_out, double* igd_out) const;
    long long interventions_total() const;

    ScmSpec spec_;
    SolverConfig cfg_;
    EvalFn eval_;
    std::vector<LocalProblem> locals_;
    std::vector<InterventionRecord> records_;
    std::vector<IterationEntry> log_;
    std::optional<std::vector<std::vector<double>>> reference_;
    double initial_gd_ = std::numeric_limits<double>::quiet_NaN();
    double initial_igd_ = std::numeric_limits<double>::quiet_NaN();
    long long initial_interventions_ = 0;
    std::uint64_t eval_counter_ = 0;
    bool initialized_ = false;
    int m_ = 0;  // objective count
};

}  // namespace cpareto
