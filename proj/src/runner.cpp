#include "causal_pareto/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "causal_pareto/rng.hpp"

namespace fs = std::filesystem;

namespace cpareto {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunnerError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunnerError("cannot write " + path.string());
    out << content;
}

std::string join_tags(const std::vector<std::string>& names) {
    if (names.empty()) return "{}";
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        // prefer the shortest representation that still round-trips
        for (int prec = 1; prec < 17; ++prec) {
            char cand[40];
            std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
            if (std::strtod(cand, nullptr) == v) return cand;
        }
    }
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::string text = read_file(path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            if (!(row.size() == 1 && row[0].empty())) rows.push_back(row);
            row.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(row);
    }
    // drop comment lines
    std::vector<std::vector<std::string>> kept;
    for (auto& r : rows) {
        if (!r.empty() && !r[0].empty() && r[0][0] == '#') continue;
        kept.push_back(std::move(r));
    }
    return kept;
}

double median(std::vector<double> values) {
    if (values.empty()) throw RunnerError("median of empty list");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sample_stddev(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

ScmSpec resolve_problem(const ExperimentConfig& cfg) {
    if (!cfg.spec_path.empty()) return parse_scm(read_file(cfg.spec_path));
    if (cfg.problem.empty()) throw RunnerError("no problem or spec file given");
    return builtin_problem(cfg.problem);
}

std::vector<std::vector<std::string>> pomis_sets(const ScmSpec& spec) {
    CausalGraph g = spec.graph;
    if (g.non_manipulative() != 0) g = g.latent_project();
    std::vector<std::vector<std::string>> sets;
    for (VSet s : g.enumerate_pomis()) sets.push_back(g.to_names(s));
    return sets;
}

std::vector<std::vector<std::string>> all_subset_sets(const ScmSpec& spec) {
    const CausalGraph& g = spec.graph;
    std::vector<std::string> tr = g.to_names(g.treatments());
    if (tr.size() > 20) throw RunnerError("too many treatments for all-subsets enumeration");
    std::vector<std::vector<std::string>> sets;
    for (std::uint64_t bits = 0; bits < (1ULL << tr.size()); ++bits) {
        std::vector<std::string> s;
        for (std::size_t k = 0; k < tr.size(); ++k)
            if ((bits >> k) & 1ULL) s.push_back(tr[k]);
        sets.push_back(std::move(s));
    }
    return sets;
}

namespace {

std::string front_to_csv(const GroundTruthFront& front) {
    std::ostringstream out;
    out << "# grid=" << front.grid_per_dim << " mc_samples=" << front.mc_samples << "\n";
    out << "set,x";
    for (const auto& nm : front.objective_names) out << "," << csv_escape(nm);
    for (const auto& nm : front.objective_names) out << ",se_" << csv_escape(nm);
    out << "\n";
    for (const auto& p : front.points) {
        out << csv_escape(p.set_tag) << ",";
        std::string xs;
        for (std::size_t i = 0; i < p.x.size(); ++i) xs += (i ? ";" : "") + format_double(p.x[i]);
        out << csv_escape(xs);
        for (double v : p.objectives) out << "," << format_double(v);
        for (double v : p.std_error) out << "," << format_double(v);
        out << "\n";
    }
    return out.str();
}

GroundTruthFront front_from_csv(const std::string& path, std::size_t m) {
    GroundTruthFront front;
    auto rows = read_csv(path);
    if (rows.empty()) throw RunnerError("empty front file " + path);
    const auto& header = rows[0];
    for (std::size_t i = 2; i < 2 + m && i < header.size(); ++i) front.objective_names.push_back(header[i]);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        GroundTruthPoint p;
        p.set_tag = row[0];
        std::istringstream xs(row[1]);
        std::string piece;
        while (std::getline(xs, piece, ';'))
            if (!piece.empty()) p.x.push_back(std::strtod(piece.c_str(), nullptr));
        for (std::size_t i = 0; i < m; ++i) p.objectives.push_back(std::strtod(row[2 + i].c_str(), nullptr));
        for (std::size_t i = 0; i < m; ++i) p.std_error.push_back(std::strtod(row[2 + m + i].c_str(), nullptr));
        front.points.push_back(std::move(p));
    }
    return front;
}

}  // namespace

GroundTruthFront cached_ground_truth(const ScmSpec& spec, const std::vector<std::vector<std::string>>& sets,
                                     int grid, int n_mc, std::uint64_t seed, const std::string& cache_dir,
                                     int threads, bool* cache_hit) {
    std::string key = serialize_scm(spec);
    key += "|grid=" + std::to_string(grid) + "|mc=" + std::to_string(n_mc) + "|seed=" + std::to_string(seed);
    for (const auto& s : sets) key += "|" + join_tags(s);
    std::uint64_t h = hash_str(key);
    char name[64];
    std::snprintf(name, sizeof(name), "gt_%016llx.csv", static_cast<unsigned long long>(h));
    fs::path path = fs::path(cache_dir) / name;
    std::size_t m = spec.target_names().size();
    if (!cache_dir.empty() && fs::exists(path)) {
        if (cache_hit) *cache_hit = true;
        GroundTruthFront front = front_from_csv(path.string(), m);
        front.objective_names = spec.target_names();
        front.grid_per_dim = grid;
        front.mc_samples = n_mc;
        return front;
    }
    if (cache_hit) *cache_hit = false;
    GroundTruthFront front = ground_truth_front(spec, sets, grid, n_mc, seed, threads);
    if (!cache_dir.empty()) write_file(path, front_to_csv(front));
    return front;
}

namespace {

std::string report_front_csv(const RunReport& rep) {
    std::ostringstream out;
    out << "set,x";
    for (const auto& nm : rep.objective_names) out << "," << csv_escape(nm);
    out << "\n";
    for (const auto& p : rep.final_front) {
        out << csv_escape(p.set_tag) << ",";
        std::string xs;
        for (std::size_t i = 0; i < p.x.size(); ++i) xs += (i ? ";" : "") + format_double(p.x[i]);
        out << csv_escape(xs);
        for (double v : p.objectives) out << "," << format_double(v);
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string run_experiment(const ExperimentConfig& cfg) {
    if (cfg.mode != "mocbo" && cfg.mode != "baseline")
        throw RunnerError("unknown mode '" + cfg.mode + "' (valid: mocbo, baseline)");
    ScmSpec spec = resolve_problem(cfg);
    std::string problem_name = cfg.problem.empty() ? fs::path(cfg.spec_path).stem().string() : cfg.problem;

    fs::path out_root = cfg.out_dir.empty() ? fs::path("results") : fs::path(cfg.out_dir);
    fs::path run_dir = out_root / (problem_name + "_" + cfg.mode);
    fs::create_directories(run_dir);

    SolverConfig base;
    base.k_init = cfg.k_init;
    base.batch_size = cfg.batch_size;
    base.iterations = cfg.iterations;
    base.mc_samples = cfg.mc_samples;
    base.front_population = cfg.front_population;
    base.front_generations = cfg.front_generations;
    base.threads = cfg.threads;
    if (cfg.mode == "mocbo") {
        base.sets_mode = SolverConfig::SetsMode::kPomis;
    } else {
        base.sets_mode = SolverConfig::SetsMode::kExplicit;
        base.explicit_sets = {spec.graph.to_names(spec.graph.treatments())};
    }

    std::optional<std::vector<std::vector<double>>> reference;
    int reference_grid = 0;
    if (cfg.metrics) {
        GroundTruthFront gt = cached_ground_truth(spec, pomis_sets(spec), cfg.grid, cfg.mc_samples,
                                                  cfg.master_seed, (out_root / "gt_cache").string(),
                                                  cfg.threads, nullptr);
        std::vector<std::vector<double>> ref_objs;
        for (const auto& p : gt.points) ref_objs.push_back(p.objectives);
        reference = std::move(ref_objs);
        reference_grid = gt.grid_per_dim;
    }

    std::vector<RunReport> reports;
    for (int s = 0; s < cfg.seeds; ++s) {
        SolverConfig sc = base;
        sc.seed = derive_seed(cfg.master_seed, "seed", static_cast<std::uint64_t>(s));
        if (cfg.checkpoints) {
            char dirname[64];
            std::snprintf(dirname, sizeof(dirname), "checkpoints_seed%02d", s);
            sc.checkpoint_dir = (run_dir / dirname).string();
        }
        RunReport rep = Solver::run(spec, sc, reference ? &*reference : nullptr);
        char fname[64];
        std::snprintf(fname, sizeof(fname), "report_seed%02d.json", s);
        write_file(run_dir / fname, report_to_json(rep));
        std::snprintf(fname, sizeof(fname), "front_seed%02d.csv", s);
        write_file(run_dir / fname, report_front_csv(rep));
        reports.push_back(std::move(rep));
    }

    // aggregate metrics: one row per iteration index (0 = after initialization)
    std::ostringstream agg;
    agg << "iteration,interventions_median,gd_median,gd_std,igd_median,igd_std\n";
    for (int it = 0; it <= cfg.iterations; ++it) {
        std::vector<double> inter, gds, igds;
        for (const auto& rep : reports) {
            if (it == 0) {
                inter.push_back(static_cast<double>(rep.initial_interventions));
                if (std::isfinite(rep.initial_gd)) gds.push_back(rep.initial_gd);
                if (std::isfinite(rep.initial_igd)) igds.push_back(rep.initial_igd);
            } else {
                const auto& e = rep.iterations[static_cast<std::size_t>(it - 1)];
                inter.push_back(static_cast<double>(e.interventions_cum));
                if (std::isfinite(e.gd)) gds.push_back(e.gd);
                if (std::isfinite(e.igd)) igds.push_back(e.igd);
            }
        }
        agg << it << "," << format_double(median(inter));
        if (!gds.empty())
            agg << "," << format_double(median(gds)) << "," << format_double(sample_stddev(gds));
        else
            agg << ",,";
        if (!igds.empty())
            agg << "," << format_double(median(igds)) << "," << format_double(sample_stddev(igds));
        else
            agg << ",,";
        agg << "\n";
    }
    write_file(run_dir / "metrics.csv", agg.str());

    // pooled front across seeds
    std::vector<FrontPoint> pooled;
    for (const auto& rep : reports)
        for (const auto& p : rep.final_front) pooled.push_back(p);
    std::vector<FrontPoint> pooled_front = non_dominated_filter(pooled);
    std::ostringstream pf;
    pf << "set,x";
    for (const auto& nm : spec.target_names()) pf << "," << csv_escape(nm);
    pf << "\n";
    for (const auto& p : pooled_front) {
        std::string xs;
        for (std::size_t i = 0; i < p.x.size(); ++i) xs += (i ? ";" : "") + format_double(p.x[i]);
        pf << csv_escape(p.set_tag) << "," << csv_escape(xs);
        for (double v : p.objectives) pf << "," << format_double(v);
        pf << "\n";
    }
    write_file(run_dir / "front_pooled.csv", pf.str());

    ordered_json meta;
    meta["problem"] = problem_name;
    meta["mode"] = cfg.mode;
    meta["seeds"] = cfg.seeds;
    meta["master_seed"] = cfg.master_seed;
    meta["iterations"] = cfg.iterations;
    meta["batch_size"] = cfg.batch_size;
    meta["k_init"] = cfg.k_init;
    meta["mc_samples"] = cfg.mc_samples;
    meta["reference_grid"] = reference_grid;
    meta["objectives"] = spec.target_names();
    write_file(run_dir / "meta.json", meta.dump(2) + "\n");
    return run_dir.string();
}

std::string resume_experiment(const ExperimentConfig& cfg) {
    if (cfg.resume_checkpoint.empty()) throw RunnerError("no checkpoint file given");
    ScmSpec spec = resolve_problem(cfg);
    std::string checkpoint = read_file(cfg.resume_checkpoint);
    ordered_json j = ordered_json::parse(checkpoint);
    SolverConfig sc;
    // reconstruct the family from the checkpoint's own set tags
    sc.sets_mode = SolverConfig::SetsMode::kExplicit;
    for (const auto& tag : j["set_names"]) {
        std::vector<std::string> members;
        std::string t = tag.get<std::string>();
        if (t != "{}") {
            std::istringstream ts(t);
            std::string piece;
            while (std::getline(ts, piece, ',')) members.push_back(piece);
        }
        sc.explicit_sets.push_back(std::move(members));
    }
    sc.k_init = j["config"]["k_init"].get<int>();
    sc.batch_size = j["config"]["batch_size"].get<int>();
    sc.iterations = cfg.iterations;
    sc.mc_samples = j["config"]["mc_samples"].get<int>();
    sc.seed = j["config"]["seed"].get<std::uint64_t>();
    sc.front_population = j["config"]["front_population"].get<int>();
    sc.front_generations = j["config"]["front_generations"].get<int>();
    sc.threads = cfg.threads;
    sc.checkpoint_dir = fs::path(cfg.resume_checkpoint).parent_path().string();

    Solver solver = Solver::resume(spec, sc, checkpoint);
    while (solver.iterations_done() < cfg.iterations) solver.step();
    RunReport rep = solver.make_report();
    fs::path out = fs::path(sc.checkpoint_dir) / "resumed_report.json";
    write_file(out, report_to_json(rep));
    return out.string();
}

std::string run_ground_truth(const ExperimentConfig& cfg, const std::string& sets_mode) {
    ScmSpec spec = resolve_problem(cfg);
    std::string problem_name = cfg.problem.empty() ? fs::path(cfg.spec_path).stem().string() : cfg.problem;
    std::vector<std::vector<std::string>> sets;
    if (sets_mode == "pomis")
        sets = pomis_sets(spec);
    else if (sets_mode == "all")
        sets = all_subset_sets(spec);
    else
        throw RunnerError("unknown sets mode '" + sets_mode + "' (valid: pomis, all)");
    fs::path out_root = cfg.out_dir.empty() ? fs::path("results") : fs::path(cfg.out_dir);
    GroundTruthFront front = cached_ground_truth(spec, sets, cfg.grid, cfg.mc_samples, cfg.master_seed,
                                                 (out_root / "gt_cache").string(), cfg.threads, nullptr);
    fs::path path = out_root / (problem_name + "_gt_" + sets_mode + ".csv");
    write_file(path, front_to_csv(front));
    return path.string();
}

CompareResult compare_runs(const std::vector<std::string>& run_dirs) {
    if (run_dirs.size() < 2) throw RunnerError("compare needs at least two run directories");
    struct Loaded {
        std::string dir, problem, mode;
        double final_gd, final_igd;
        std::vector<std::vector<double>> front;
    };
    std::vector<Loaded> runs;
    for (const auto& dir : run_dirs) {
        Loaded l;
        l.dir = dir;
        ordered_json meta = ordered_json::parse(read_file(fs::path(dir) / "meta.json"));
        l.problem = meta["problem"].get<std::string>();
        l.mode = meta["mode"].get<std::string>();
        auto rows = read_csv((fs::path(dir) / "metrics.csv").string());
        if (rows.size() < 2) throw RunnerError("metrics.csv in " + dir + " has no data rows");
        const auto& last = rows.back();
        l.final_gd = std::strtod(last[2].c_str(), nullptr);
        l.final_igd = std::strtod(last[4].c_str(), nullptr);
        auto front_rows = read_csv((fs::path(dir) / "front_pooled.csv").string());
        for (std::size_t r = 1; r < front_rows.size(); ++r) {
            std::vector<double> obj;
            for (std::size_t c = 2; c < front_rows[r].size(); ++c)
                obj.push_back(std::strtod(front_rows[r][c].c_str(), nullptr));
            l.front.push_back(std::move(obj));
        }
        runs.push_back(std::move(l));
    }
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].problem != runs[0].problem)
            throw RunnerError("run directories mix problems: " + runs[0].problem + " vs " + runs[i].problem);

    CompareResult out;
    out.problem = runs[0].problem;
    std::ostringstream table;
    table << "problem: " << out.problem << "\n";
    table << "dir,mode,final_gd_median,final_igd_median,fraction_dominated_by_other\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        CompareRow row;
        row.dir = runs[i].dir;
        row.mode = runs[i].mode;
        row.final_gd_median = runs[i].final_gd;
        row.final_igd_median = runs[i].final_igd;
        // dominance of this front by the union of the other runs' fronts
        std::vector<std::vector<double>> others;
        for (std::size_t j = 0; j < runs.size(); ++j)
            if (j != i)
                for (const auto& p : runs[j].front) others.push_back(p);
        int dominated = 0;
        for (const auto& p : runs[i].front) {
            bool dom = false;
            for (const auto& q : others)
                if (dominates(q, p)) {
                    dom = true;
                    break;
                }
            if (dom) ++dominated;
        }
        row.fraction_dominated_by_other =
            runs[i].front.empty() ? 0.0 : static_cast<double>(dominated) / static_cast<double>(runs[i].front.size());
        table << csv_escape(row.dir) << "," << row.mode << "," << format_double(row.final_gd_median) << ","
              << format_double(row.final_igd_median) << "," << format_double(row.fraction_dominated_by_other)
              << "\n";
        out.rows.push_back(std::move(row));
    }
    out.table_text = table.str();
    return out;
}

std::string analyze_graph_json(const CausalGraph& graph) {
    ordered_json j;
    auto family_json = [](const CausalGraph& g, const std::vector<VSet>& family) {
        ordered_json arr = ordered_json::array();
        for (VSet s : family) arr.push_back(g.to_names(s));
        return arr;
    };
    ordered_json vars = ordered_json::array();
    for (int v = 0; v < graph.size(); ++v) {
        ordered_json entry;
        entry["name"] = graph.name(v);
        entry["role"] = role_name(graph.role(v));
        vars.push_back(entry);
    }
    j["variables"] = vars;
    CausalGraph g = graph;
    bool projected = graph.non_manipulative() != 0;
    j["projected"] = projected;
    if (projected) {
        g = graph.latent_project();
        ordered_json edges = ordered_json::array();
        for (auto [a, b] : g.directed_edges()) edges.push_back(g.name(a) + " -> " + g.name(b));
        for (auto [a, b] : g.bidirected_edges()) edges.push_back(g.name(a) + " <-> " + g.name(b));
        j["projected_edges"] = edges;
    }
    j["muct"] = g.to_names(g.muct());
    j["interventional_border"] = g.to_names(g.interventional_border());
    j["mis"] = family_json(g, g.enumerate_mis());
    j["pomis"] = family_json(g, g.enumerate_pomis());
    return j.dump(2) + "\n";
}

}  // namespace cpareto
