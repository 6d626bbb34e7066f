#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "causal_pareto/runner.hpp"
#include "causal_pareto/rng.hpp"

namespace {

using namespace cpareto;

std::string default_out_root() {
    if (const char* env = std::getenv("CAUSAL_PARETO_OUT")) return env;
    return "results";
}

std::string read_file_or_die(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunnerError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CausalGraph load_graph(const ExperimentConfig& cfg) {
    if (!cfg.spec_path.empty()) {
        std::string text = read_file_or_die(cfg.spec_path);
        // A full SCM spec file doubles as a graph description.
        if (text.find("[equations]") != std::string::npos) return parse_scm(text).graph;
        return CausalGraph::parse(text);
    }
    return builtin_problem(cfg.problem).graph;
}

InterventionAssignment parse_do(const std::string& text) {
    std::vector<std::pair<std::string, double>> pairs;
    std::istringstream in(text);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        auto eq = piece.find('=');
        if (eq == std::string::npos) throw RunnerError("malformed --do entry '" + piece + "' (expected VAR=VALUE)");
        std::string name = piece.substr(0, eq);
        name.erase(std::remove_if(name.begin(), name.end(), ::isspace), name.end());
        char* end = nullptr;
        double value = std::strtod(piece.c_str() + eq + 1, &end);
        if (end == piece.c_str() + eq + 1) throw RunnerError("malformed value in --do entry '" + piece + "'");
        pairs.emplace_back(name, value);
    }
    return InterventionAssignment::make(std::move(pairs));
}

void add_problem_flags(CLI::App* cmd, ExperimentConfig& cfg) {
    cmd->add_option("--problem", cfg.problem, "built-in problem (synthetic1, synthetic2, health)");
    cmd->add_option("--spec", cfg.spec_path, "path to an SCM spec file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pareto-optimal intervention search on structural causal models"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    cfg.out_dir = default_out_root();

    // run
    auto* run_cmd = app.add_subcommand("run", "run the optimizer across seeds and write reports");
    add_problem_flags(run_cmd, cfg);
    std::string run_mode = "mocbo";
    run_cmd->add_option("--mode", run_mode, "mocbo | baseline | graph-analyze | ground-truth");
    run_cmd->add_option("--iters", cfg.iterations, "optimization iterations per seed");
    run_cmd->add_option("--batch-size", cfg.batch_size, "interventions evaluated per iteration");
    run_cmd->add_option("--init-samples", cfg.k_init, "initial samples per intervention set");
    run_cmd->add_option("--mc-samples", cfg.mc_samples, "Monte-Carlo samples per mean estimate");
    run_cmd->add_option("--seeds", cfg.seeds, "number of seeds");
    run_cmd->add_option("--seed", cfg.master_seed, "master seed");
    run_cmd->add_option("--grid", cfg.grid, "reference-front grid resolution per dimension");
    run_cmd->add_option("--threads", cfg.threads, "worker threads");
    run_cmd->add_option("--out", cfg.out_dir, "output root directory");
    run_cmd->add_flag("!--no-metrics", cfg.metrics, "skip GD/IGD against the ground-truth front");
    run_cmd->add_flag("--checkpoints", cfg.checkpoints, "write a checkpoint file per iteration");
    run_cmd->add_option("--resume", cfg.resume_checkpoint, "resume a run from a checkpoint file");

    // ground-truth
    auto* gt_cmd = app.add_subcommand("ground-truth", "grid-evaluate intervention sets and emit the exact front");
    add_problem_flags(gt_cmd, cfg);
    std::string gt_sets = "pomis";
    gt_cmd->add_option("--sets", gt_sets, "pomis | all");
    gt_cmd->add_option("--grid", cfg.grid, "grid resolution per dimension");
    gt_cmd->add_option("--mc-samples", cfg.mc_samples, "Monte-Carlo samples per grid point");
    gt_cmd->add_option("--seed", cfg.master_seed, "seed");
    gt_cmd->add_option("--threads", cfg.threads, "worker threads");
    gt_cmd->add_option("--out", cfg.out_dir, "output root directory");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "compare finished run directories");
    std::vector<std::string> cmp_dirs;
    cmp_cmd->add_option("dirs", cmp_dirs, "run directories")->expected(-2);
    std::string cmp_out;
    cmp_cmd->add_option("--out", cmp_out, "write the comparison table to this file");

    // graph analyze
    auto* graph_cmd = app.add_subcommand("graph", "graph-theoretic analysis");
    auto* analyze_cmd = graph_cmd->add_subcommand("analyze", "print MUCT, IB, MIS and POMIS families as JSON");
    add_problem_flags(analyze_cmd, cfg);

    // scm eval
    auto* scm_cmd = app.add_subcommand("scm", "structural causal model utilities");
    auto* eval_cmd = scm_cmd->add_subcommand("eval", "estimate interventional target means");
    add_problem_flags(eval_cmd, cfg);
    std::string do_text;
    eval_cmd->add_option("--do", do_text, "intervention, e.g. \"X2=1.0,X3=0.5\"");
    int eval_n = 10000;
    eval_cmd->add_option("--n", eval_n, "Monte-Carlo samples");
    std::uint64_t eval_seed = 0;
    eval_cmd->add_option("--seed", eval_seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) {
            if (run_mode == "graph-analyze") {
                std::cout << analyze_graph_json(load_graph(cfg));
            } else if (run_mode == "ground-truth") {
                std::cout << run_ground_truth(cfg, gt_sets) << "\n";
            } else if (!cfg.resume_checkpoint.empty()) {
                cfg.mode = run_mode;
                std::cout << resume_experiment(cfg) << "\n";
            } else {
                cfg.mode = run_mode;
                std::string dir = run_experiment(cfg);
                std::cout << dir << "\n";
            }
        } else if (gt_cmd->parsed()) {
            std::cout << run_ground_truth(cfg, gt_sets) << "\n";
        } else if (cmp_cmd->parsed()) {
            CompareResult result = compare_runs(cmp_dirs);
            std::cout << result.table_text;
            if (!cmp_out.empty()) {
                std::ofstream out(cmp_out);
                out << result.table_text;
            }
        } else if (graph_cmd->parsed()) {
            if (!analyze_cmd->parsed()) throw RunnerError("usage: graph analyze --problem NAME | --spec FILE");
            std::cout << analyze_graph_json(load_graph(cfg));
        } else if (scm_cmd->parsed()) {
            if (!eval_cmd->parsed()) throw RunnerError("usage: scm eval --problem NAME --do \"X=V\"");
            ScmSpec spec = resolve_problem(cfg);
            InterventionAssignment iv = parse_do(do_text);
            MuVector mu = interventional_mean(spec, iv, eval_n, eval_seed);
            nlohmann::ordered_json j;
            j["do"] = iv.to_string();
            j["targets"] = spec.target_names();
            j["means"] = mu.means;
            j["std_error"] = mu.std_error;
            j["mc_samples"] = mu.mc_samples;
            std::cout << j.dump(2) << "\n";
        }
    } catch (const ScmError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const GraphError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const RunnerError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
