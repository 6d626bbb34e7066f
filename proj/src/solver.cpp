#include "causal_pareto/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "causal_pareto/rng.hpp"

namespace cpareto {

namespace {

using ordered_json = nlohmann::ordered_json;

// radical-inverse (Halton) low-discrepancy points, Cranley-Patterson shifted
double radical_inverse(int base, std::uint64_t index) {
    double inv = 1.0 / base;
    double factor = inv;
    double value = 0.0;
    while (index > 0) {
        value += factor * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
        factor *= inv;
    }
    return value;
}

constexpr int kHaltonPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

void parallel_over(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(threads, static_cast<int>(count));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

Solver::Solver(ScmSpec spec, SolverConfig config, EvalFn evaluate)
    : spec_(std::move(spec)), cfg_(std::move(config)), eval_(std::move(evaluate)) {
    if (cfg_.k_init < 1) throw SolverError("k_init must be >= 1");
    if (cfg_.batch_size < 1) throw SolverError("batch_size must be >= 1");
    if (cfg_.iterations < 0) throw SolverError("iterations must be >= 0");
    if (cfg_.mc_samples < 2) throw SolverError("mc_samples must be >= 2");
    m_ = static_cast<int>(spec_.target_names().size());
    resolve_sets();
}

void Solver::resolve_sets() {
    std::vector<std::vector<std::string>> sets;
    switch (cfg_.sets_mode) {
        case SolverConfig::SetsMode::kPomis: {
            CausalGraph g = spec_.graph;
            if (g.non_manipulative() != 0) g = g.latent_project();
            for (VSet s : g.enumerate_pomis()) sets.push_back(g.to_names(s));
            break;
        }
        case SolverConfig::SetsMode::kAllSubsets: {
            const CausalGraph& g = spec_.graph;
            std::vector<std::string> tr = g.to_names(g.treatments());
            if (tr.size() > 20) throw SolverError("search space too large for all-subsets mode");
            for (std::uint64_t bits = 0; bits < (1ULL << tr.size()); ++bits) {
                std::vector<std::string> s;
                for (std::size_t k = 0; k < tr.size(); ++k)
                    if ((bits >> k) & 1ULL) s.push_back(tr[k]);
                sets.push_back(std::move(s));
            }
            break;
        }
        case SolverConfig::SetsMode::kExplicit:
            sets = cfg_.explicit_sets;
            for (auto& s : sets) std::sort(s.begin(), s.end());
            break;
    }
    if (sets.empty()) throw SolverError("configuration resolves to an empty family of intervention sets");
    for (auto& s : sets) std::sort(s.begin(), s.end());
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());

    for (const auto& s : sets) {
        LocalProblem lp;
        lp.variables = s;
        lp.tag = s.empty() ? "{}" : "";
        for (std::size_t i = 0; i < s.size(); ++i) lp.tag += (i ? "," : "") + s[i];
        for (const auto& nm : s) {
            int v = spec_.graph.index_of(nm);
            if (spec_.graph.role(v) != Role::kTreatment)
                throw SolverError("intervention set member '" + nm + "' is not a treatment");
            auto it = spec_.domains.find(nm);
            if (it == spec_.domains.end()) throw SolverError("missing domain for '" + nm + "'");
            lp.bounds.push_back(it->second);
        }
        locals_.push_back(std::move(lp));
    }
}

MuVector Solver::evaluate_assignment(const InterventionAssignment& iv, std::uint64_t seed) const {
    if (eval_) return eval_(iv, cfg_.mc_samples, seed);
    return interventional_mean(spec_, iv, cfg_.mc_samples, seed);
}

InterventionAssignment Solver::assignment_for(int set_index, const std::vector<double>& unit_x,
                                              std::vector<double>* domain_x) const {
    const LocalProblem& lp = locals_[static_cast<std::size_t>(set_index)];
    InterventionAssignment iv;
    iv.variables = lp.variables;
    for (std::size_t d = 0; d < lp.variables.size(); ++d) {
        double lo = lp.bounds[d].first, hi = lp.bounds[d].second;
        iv.values.push_back(lo + (hi - lo) * unit_x[d]);
    }
    if (domain_x) *domain_x = iv.values;
    return iv;
}

void Solver::refit_local(int set_index) {
    LocalProblem& lp = locals_[static_cast<std::size_t>(set_index)];
    int d = static_cast<int>(lp.variables.size());
    if (d == 0) {
        lp.models.clear();
        return;
    }
    lp.models.clear();
    for (int obj = 0; obj < m_; ++obj) {
        std::vector<GpDataPoint> pts;
        for (std::size_t ri : lp.record_idx) {
            const InterventionRecord& r = records_[ri];
            GpDataPoint p;
            for (std::size_t k = 0; k < lp.variables.size(); ++k) {
                double lo = lp.bounds[k].first, hi = lp.bounds[k].second;
                p.x.push_back((r.x[k] - lo) / (hi - lo));
            }
            p.y = r.mu[static_cast<std::size_t>(obj)];
            p.std_error = r.std_error[static_cast<std::size_t>(obj)];
            pts.push_back(std::move(p));
        }
        lp.models.push_back(GpModel::fit(pts, d, derive_seed(cfg_.seed, "gp", static_cast<std::uint64_t>(set_index),
                                                             static_cast<std::uint64_t>(lp.fit_epoch),
                                                             static_cast<std::uint64_t>(obj))));
    }
}

void Solver::rediscover_local(int set_index) {
    LocalProblem& lp = locals_[static_cast<std::size_t>(set_index)];
    int d = static_cast<int>(lp.variables.size());
    if (d == 0) {
        // 0-dimensional problem: the observational regime; its approximation
        // is the mean of its evaluations at the single (empty) input.
        std::vector<double> mean(static_cast<std::size_t>(m_), 0.0);
        for (std::size_t ri : lp.record_idx)
            for (int i = 0; i < m_; ++i) mean[static_cast<std::size_t>(i)] += records_[ri].mu[static_cast<std::size_t>(i)];
        for (double& v : mean) v /= static_cast<double>(lp.record_idx.size());
        lp.approx.inputs = {std::vector<double>{}};
        lp.approx.values = {mean};
        lp.regions.region_of = {0};
        lp.regions.count = 1;
        return;
    }
    auto objective = [&](const std::vector<double>& x) {
        std::vector<double> f;
        f.reserve(static_cast<std::size_t>(m_));
        for (const auto& model : lp.models) f.push_back(model.posterior(x).first);
        return f;
    };
    lp.approx = discover_front(objective, d, cfg_.front_population, cfg_.front_generations,
                               derive_seed(cfg_.seed, "front", static_cast<std::uint64_t>(set_index),
                                           static_cast<std::uint64_t>(lp.fit_epoch)));
    lp.regions = diversity_regions(lp.approx.inputs);
}

std::vector<std::vector<double>> Solver::evaluated_front(int set_index) const {
    const LocalProblem& lp = locals_[static_cast<std::size_t>(set_index)];
    std::vector<std::vector<double>> objs;
    for (std::size_t ri : lp.record_idx) objs.push_back(records_[ri].mu);
    std::vector<std::vector<double>> front;
    for (std::size_t i : non_dominated_indices(objs)) front.push_back(objs[i]);
    return front;
}

std::vector<double> Solver::shared_reference_point() const {
    if (records_.empty()) throw SolverError("reference point requires at least one evaluation");
    std::vector<double> nadir(static_cast<std::size_t>(m_), -std::numeric_limits<double>::infinity());
    std::vector<double> ideal(static_cast<std::size_t>(m_), std::numeric_limits<double>::infinity());
    for (const auto& r : records_) {
        for (int i = 0; i < m_; ++i) {
            nadir[static_cast<std::size_t>(i)] = std::max(nadir[static_cast<std::size_t>(i)], r.mu[static_cast<std::size_t>(i)]);
            ideal[static_cast<std::size_t>(i)] = std::min(ideal[static_cast<std::size_t>(i)], r.mu[static_cast<std::size_t>(i)]);
        }
    }
    std::vector<double> ref(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        std::size_t ii = static_cast<std::size_t>(i);
        double range = nadir[ii] - ideal[ii];
        ref[ii] = nadir[ii] + 0.1 * range + 1e-9 * (1.0 + std::fabs(nadir[ii]));
    }
    return ref;
}

void Solver::metrics_now(double* gd_out, double* igd_out) const {
    if (!reference_) return;
    std::vector<std::vector<double>> objs;
    for (const auto& r : records_) objs.push_back(r.mu);
    std::vector<std::vector<double>> front;
    for (std::size_t i : non_dominated_indices(objs)) front.push_back(objs[i]);
    *gd_out = gd(front, *reference_);
    *igd_out = igd(front, *reference_);
}

long long Solver::interventions_total() const {
    long long total = 0;
    for (const auto& r : records_) total += static_cast<long long>(r.x.size());
    return total;
}

void Solver::set_reference_front(std::vector<std::vector<double>> reference) {
    reference_ = std::move(reference);
}

void Solver::initialize() {
    if (initialized_) throw SolverError("solver already initialized");
    for (std::size_t s = 0; s < locals_.size(); ++s) {
        LocalProblem& lp = locals_[s];
        std::size_t d = lp.variables.size();
        Stream shift_rng(derive_seed(cfg_.seed, "init", lp.tag));
        std::vector<double> shift(d);
        for (double& v : shift) v = shift_rng.next_double();
        for (int k = 0; k < cfg_.k_init; ++k) {
            std::vector<double> unit(d);
            for (std::size_t dd = 0; dd < d; ++dd) {
                double h = radical_inverse(kHaltonPrimes[dd], static_cast<std::uint64_t>(k) + 1);
                unit[dd] = std::fmod(h + shift[dd], 1.0);
            }
            std::vector<double> domain_x;
            InterventionAssignment iv = assignment_for(static_cast<int>(s), unit, &domain_x);
            MuVector mu = evaluate_assignment(iv, derive_seed(cfg_.seed, "eval", eval_counter_));
            ++eval_counter_;
            InterventionRecord rec;
            rec.set_index = static_cast<int>(s);
            rec.x = domain_x;
            rec.mu = mu.means;
            rec.std_error = mu.std_error;
            lp.record_idx.push_back(records_.size());
            records_.push_back(std::move(rec));
        }
    }
    for (std::size_t s = 0; s < locals_.size(); ++s) {
        locals_[s].fit_epoch = 0;
        refit_local(static_cast<int>(s));
        rediscover_local(static_cast<int>(s));
    }
    initialized_ = true;
    initial_interventions_ = interventions_total();
    metrics_now(&initial_gd_, &initial_igd_);
    if (!cfg_.checkpoint_dir.empty()) write_checkpoint();
}

void Solver::step() {
    if (!initialized_) throw SolverError("step() before initialize()");
    std::vector<double> ref = shared_reference_point();

    struct Candidate {
        std::vector<std::vector<double>> unit_x;
        std::vector<std::vector<double>> pred_f;
        double rhvi_value = 0.0;
    };
    std::vector<Candidate> per_set(locals_.size());
    parallel_over(locals_.size(), cfg_.threads, [&](std::size_t s) {
        const LocalProblem& lp = locals_[s];
        std::vector<std::vector<double>> archive = evaluated_front(static_cast<int>(s));
        std::vector<std::size_t> picks = select_local_batch(lp.approx.inputs, lp.approx.values, lp.regions,
                                                            archive, ref, cfg_.batch_size);
        Candidate c;
        for (std::size_t idx : picks) {
            c.unit_x.push_back(lp.approx.inputs[idx]);
            c.pred_f.push_back(lp.approx.values[idx]);
        }
        // keep the evaluation budget exact when the candidate pool is short
        std::size_t base = c.unit_x.size();
        while (base > 0 && c.unit_x.size() < static_cast<std::size_t>(cfg_.batch_size)) {
            c.unit_x.push_back(c.unit_x[c.unit_x.size() % base]);
            c.pred_f.push_back(c.pred_f[c.pred_f.size() % base]);
        }
        c.rhvi_value = rhvi(c.pred_f, archive, ref);
        per_set[s] = std::move(c);
    });

    std::size_t chosen = 0;
    for (std::size_t s = 1; s < per_set.size(); ++s)
        if (per_set[s].rhvi_value > per_set[chosen].rhvi_value) chosen = s;

    // evaluate the chosen batch; any failure aborts the step atomically
    LocalProblem& lp = locals_[chosen];
    std::vector<InterventionRecord> fresh;
    std::uint64_t counter = eval_counter_;
    IterationEntry entry;
    for (const auto& unit : per_set[chosen].unit_x) {
        std::vector<double> domain_x;
        InterventionAssignment iv = assignment_for(static_cast<int>(chosen), unit, &domain_x);
        MuVector mu = evaluate_assignment(iv, derive_seed(cfg_.seed, "eval", counter));
        ++counter;
        InterventionRecord rec;
        rec.set_index = static_cast<int>(chosen);
        rec.x = domain_x;
        rec.mu = mu.means;
        rec.std_error = mu.std_error;
        entry.batch_x.push_back(domain_x);
        entry.batch_mu.push_back(mu.means);
        fresh.push_back(std::move(rec));
    }

    // commit
    eval_counter_ = counter;
    for (auto& rec : fresh) {
        lp.record_idx.push_back(records_.size());
        records_.push_back(std::move(rec));
    }
    lp.fit_epoch += 1;
    refit_local(static_cast<int>(chosen));
    rediscover_local(static_cast<int>(chosen));

    entry.iteration = static_cast<int>(log_.size()) + 1;
    entry.chosen_set = static_cast<int>(chosen);
    entry.rhvi_value = per_set[chosen].rhvi_value;
    for (const auto& c : per_set) entry.rhvi_all.push_back(c.rhvi_value);
    entry.interventions_cum = interventions_total();
    metrics_now(&entry.gd, &entry.igd);
    log_.push_back(std::move(entry));
    if (!cfg_.checkpoint_dir.empty()) write_checkpoint();
}

std::vector<FrontPoint> Solver::extract_causal_front() const {
    std::vector<FrontPoint> pool;
    for (const auto& r : records_) {
        FrontPoint p;
        p.objectives = r.mu;
        p.x = r.x;
        p.std_error = r.std_error;
        p.set_tag = locals_[static_cast<std::size_t>(r.set_index)].tag;
        pool.push_back(std::move(p));
    }
    return non_dominated_filter(pool);
}

RunReport Solver::make_report() const {
    RunReport rep;
    rep.seed = cfg_.seed;
    for (const auto& lp : locals_) rep.set_names.push_back(lp.tag);
    rep.objective_names = spec_.target_names();
    rep.records = records_;
    rep.iterations = log_;
    rep.initial_gd = initial_gd_;
    rep.initial_igd = initial_igd_;
    rep.initial_interventions = initial_interventions_;
    rep.total_evaluations = static_cast<long long>(records_.size());
    rep.total_interventions = interventions_total();
    rep.final_front = extract_causal_front();
    return rep;
}

RunReport Solver::run(const ScmSpec& spec, const SolverConfig& config,
                      const std::vector<std::vector<double>>* reference, EvalFn evaluate) {
    Solver solver(spec, config, std::move(evaluate));
    if (reference) solver.set_reference_front(*reference);
    solver.initialize();
    for (int i = 0; i < config.iterations; ++i) solver.step();
    return solver.make_report();
}

namespace {

ordered_json config_to_json(const SolverConfig& c) {
    ordered_json j;
    j["sets_mode"] = c.sets_mode == SolverConfig::SetsMode::kPomis        ? "pomis"
                     : c.sets_mode == SolverConfig::SetsMode::kAllSubsets ? "all_subsets"
                                                                          : "explicit";
    j["k_init"] = c.k_init;
    j["batch_size"] = c.batch_size;
    j["iterations"] = c.iterations;
    j["mc_samples"] = c.mc_samples;
    j["seed"] = c.seed;
    j["front_population"] = c.front_population;
    j["front_generations"] = c.front_generations;
    return j;
}

ordered_json record_to_json(const InterventionRecord& r) {
    ordered_json j;
    j["set"] = r.set_index;
    j["x"] = r.x;
    j["mu"] = r.mu;
    j["std_error"] = r.std_error;
    return j;
}

ordered_json entry_to_json(const IterationEntry& e) {
    ordered_json j;
    j["iteration"] = e.iteration;
    j["chosen_set"] = e.chosen_set;
    j["rhvi"] = std::isfinite(e.rhvi_value) ? ordered_json(e.rhvi_value) : ordered_json("inf");
    j["rhvi_all"] = ordered_json::array();
    for (double v : e.rhvi_all) j["rhvi_all"].push_back(std::isfinite(v) ? ordered_json(v) : ordered_json("inf"));
    j["batch_x"] = e.batch_x;
    j["batch_mu"] = e.batch_mu;
    j["interventions"] = e.interventions_cum;
    if (std::isfinite(e.gd)) j["gd"] = e.gd;
    if (std::isfinite(e.igd)) j["igd"] = e.igd;
    return j;
}

}  // namespace

std::string report_to_json(const RunReport& rep) {
    ordered_json j;
    j["seed"] = rep.seed;
    j["sets"] = rep.set_names;
    j["objectives"] = rep.objective_names;
    j["initial"] = ordered_json::object();
    if (std::isfinite(rep.initial_gd)) j["initial"]["gd"] = rep.initial_gd;
    if (std::isfinite(rep.initial_igd)) j["initial"]["igd"] = rep.initial_igd;
    j["initial"]["interventions"] = rep.initial_interventions;
    j["iterations"] = ordered_json::array();
    for (const auto& e : rep.iterations) j["iterations"].push_back(entry_to_json(e));
    j["records"] = ordered_json::array();
    for (const auto& r : rep.records) j["records"].push_back(record_to_json(r));
    j["totals"]["evaluations"] = rep.total_evaluations;
    j["totals"]["interventions"] = rep.total_interventions;
    j["final_front"] = ordered_json::array();
    for (const auto& p : rep.final_front) {
        ordered_json fp;
        fp["set"] = p.set_tag;
        fp["x"] = p.x;
        fp["objectives"] = p.objectives;
        fp["std_error"] = p.std_error;
        j["final_front"].push_back(fp);
    }
    return j.dump(2) + "\n";
}

std::string Solver::checkpoint_json() const {
    ordered_json j;
    j["schema"] = "causal-pareto-checkpoint-v1";
    j["config"] = config_to_json(cfg_);
    j["eval_counter"] = eval_counter_;
    j["set_names"] = ordered_json::array();
    for (const auto& lp : locals_) j["set_names"].push_back(lp.tag);
    j["fit_epochs"] = ordered_json::array();
    for (const auto& lp : locals_) j["fit_epochs"].push_back(lp.fit_epoch);
    j["records"] = ordered_json::array();
    for (const auto& r : records_) j["records"].push_back(record_to_json(r));
    j["log"] = ordered_json::array();
    for (const auto& e : log_) j["log"].push_back(entry_to_json(e));
    j["initial"]["interventions"] = initial_interventions_;
    if (std::isfinite(initial_gd_)) j["initial"]["gd"] = initial_gd_;
    if (std::isfinite(initial_igd_)) j["initial"]["igd"] = initial_igd_;
    return j.dump(2) + "\n";
}

void Solver::write_checkpoint() const {
    std::filesystem::create_directories(cfg_.checkpoint_dir);
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_%04d.json", iterations_done());
    std::ofstream out(std::filesystem::path(cfg_.checkpoint_dir) / name);
    out << checkpoint_json();
}

Solver Solver::resume(ScmSpec spec, SolverConfig config, const std::string& checkpoint, EvalFn evaluate) {
    ordered_json j = ordered_json::parse(checkpoint);
    if (j.value("schema", "") != "causal-pareto-checkpoint-v1")
        throw SolverError("unrecognized checkpoint schema");
    Solver solver(std::move(spec), std::move(config), std::move(evaluate));
    std::vector<std::string> names = j["set_names"].get<std::vector<std::string>>();
    std::vector<std::string> own;
    for (const auto& lp : solver.locals_) own.push_back(lp.tag);
    if (own != names) throw SolverError("checkpoint intervention sets do not match the configuration");

    for (const auto& rj : j["records"]) {
        InterventionRecord r;
        r.set_index = rj["set"].get<int>();
        r.x = rj["x"].get<std::vector<double>>();
        r.mu = rj["mu"].get<std::vector<double>>();
        r.std_error = rj["std_error"].get<std::vector<double>>();
        solver.locals_[static_cast<std::size_t>(r.set_index)].record_idx.push_back(solver.records_.size());
        solver.records_.push_back(std::move(r));
    }
    std::vector<int> epochs = j["fit_epochs"].get<std::vector<int>>();
    for (std::size_t s = 0; s < solver.locals_.size(); ++s) {
        solver.locals_[s].fit_epoch = epochs[s];
        solver.refit_local(static_cast<int>(s));
        solver.rediscover_local(static_cast<int>(s));
    }
    for (const auto& ej : j["log"]) {
        IterationEntry e;
        e.iteration = ej["iteration"].get<int>();
        e.chosen_set = ej["chosen_set"].get<int>();
        if (ej["rhvi"].is_string())
            e.rhvi_value = std::numeric_limits<double>::infinity();
        else
            e.rhvi_value = ej["rhvi"].get<double>();
        for (const auto& v : ej["rhvi_all"])
            e.rhvi_all.push_back(v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>());
        e.batch_x = ej["batch_x"].get<std::vector<std::vector<double>>>();
        e.batch_mu = ej["batch_mu"].get<std::vector<std::vector<double>>>();
        e.interventions_cum = ej["interventions"].get<long long>();
        if (ej.contains("gd")) e.gd = ej["gd"].get<double>();
        if (ej.contains("igd")) e.igd = ej["igd"].get<double>();
        solver.log_.push_back(std::move(e));
    }
    solver.eval_counter_ = j["eval_counter"].get<std::uint64_t>();
    solver.initial_interventions_ = j["initial"]["interventions"].get<long long>();
    if (j["initial"].contains("gd")) solver.initial_gd_ = j["initial"]["gd"].get<double>();
    if (j["initial"].contains("igd")) solver.initial_igd_ = j["initial"]["igd"].get<double>();
    solver.initialized_ = true;
    return solver;
}

}  // namespace cpareto
