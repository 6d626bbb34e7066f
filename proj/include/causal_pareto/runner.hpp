#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causal_pareto/scm.hpp"
#include "causal_pareto/solver.hpp"

namespace cpareto {

struct RunnerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string problem;    // builtin name; empty when spec_path is used
    std::string spec_path;  // optional path to a spec file
    std::string mode = "mocbo";  // mocbo | baseline
    int iterations = 30;
    int batch_size = 5;
    int k_init = 5;
    int mc_samples = 10000;
    int seeds = 10;
    std::uint64_t master_seed = 0;
    int grid = 41;  // reference front resolution
    bool metrics = true;
    int threads = 1;
    int front_population = 100;
    int front_generations = 50;
    std::string out_dir;
    bool checkpoints = false;       // write per-iteration checkpoint files
    std::string resume_checkpoint;  // resume a single-seed run from this file
};

ScmSpec resolve_problem(const ExperimentConfig& cfg);

// CSV helpers shared by the runner and its tests. Values are written with
// enough digits to re-parse to the exact same doubles.
std::string csv_escape(const std::string& field);
std::string format_double(double v);
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// Ground-truth front computed over the POMIS family (or explicit sets),
// cached on disk keyed by the content of (spec, sets, grid, n_mc, seed).
GroundTruthFront cached_ground_truth(const ScmSpec& spec, const std::vector<std::vector<std::string>>& sets,
                                     int grid, int n_mc, std::uint64_t seed, const std::string& cache_dir,
                                     int threads, bool* cache_hit = nullptr);

std::vector<std::vector<std::string>> pomis_sets(const ScmSpec& spec);
std::vector<std::vector<std::string>> all_subset_sets(const ScmSpec& spec);

// Runs one mode across the configured seeds, writing per-seed reports,
// per-seed fronts, the pooled front and the aggregate metrics table.
// Returns the output directory used.
std::string run_experiment(const ExperimentConfig& cfg);

// Continues a single run from a checkpoint file up to cfg.iterations total
// iterations and writes the resulting report next to the checkpoint.
// Returns the report path.
std::string resume_experiment(const ExperimentConfig& cfg);

// Writes the ground-truth front as CSV (plus cache) and returns the path.
std::string run_ground_truth(const ExperimentConfig& cfg, const std::string& sets_mode);

struct CompareRow {
    std::string dir;
    std::string mode;
    double final_gd_median = 0.0;
    double final_igd_median = 0.0;
    // fraction of this run's pooled front dominated by the other run's front
    double fraction_dominated_by_other = 0.0;
};

struct CompareResult {
    std::string problem;
    std::vector<CompareRow> rows;
    std::string table_text;
};

CompareResult compare_runs(const std::vector<std::string>& run_dirs);

// Graph analysis: MUCT, interventional border, MIS and POMIS families as
// JSON; non-manipulative vertices are projected out first.
std::string analyze_graph_json(const CausalGraph& graph);

double median(std::vector<double> values);
double sample_stddev(const std::vector<double>& values);

}  // namespace cpareto
