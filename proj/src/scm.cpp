#include "causal_pareto/scm.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "causal_pareto/pareto.hpp"
#include "causal_pareto/rng.hpp"

namespace cpareto {

namespace {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    if (std::strtod(buf, nullptr) == v) return buf;
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Line {
    int no;
    std::string text;
};

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw ScmError("line " + std::to_string(line) + ": " + msg);
}

}  // namespace

const ExogenousSpec& ScmSpec::exogenous_by_name(const std::string& name) const {
    for (const auto& e : exogenous)
        if (e.name == name) return e;
    throw ScmError("unknown exogenous variable '" + name + "'");
}

InterventionAssignment InterventionAssignment::make(std::vector<std::pair<std::string, double>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    InterventionAssignment iv;
    for (const auto& [name, value] : pairs) {
        if (!iv.variables.empty() && iv.variables.back() == name)
            throw ScmError("duplicate intervention variable '" + name + "'");
        iv.variables.push_back(name);
        iv.values.push_back(value);
    }
    return iv;
}

std::string InterventionAssignment::to_string() const {
    if (variables.empty()) return "{}";
    std::string out;
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (i) out += ",";
        out += variables[i] + "=" + fmt_num(values[i]);
    }
    return out;
}

ScmSpec parse_scm(const std::string& text) {
    std::vector<std::pair<std::string, Role>> verts;
    std::vector<std::pair<std::string, std::string>> directed;
    std::vector<std::pair<std::string, std::string>> explicit_bidir;
    std::vector<std::pair<int, std::string>> bidir_lines;
    struct RawEquation {
        std::string var, rhs;
        int line;
    };
    std::vector<RawEquation> raw_eqs;
    std::vector<ExogenousSpec> exo;
    std::vector<int> exo_lines;
    std::map<std::string, std::pair<double, double>> domains;
    std::map<std::string, int> domain_lines;
    std::string header;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    bool seen_section = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        auto hash = stripped.find('#');
        if (!seen_section) {
            // keep leading comment lines verbatim as the file's header
            std::string trimmed = stripped;
            trimmed.erase(0, trimmed.find_first_not_of(" \t"));
            if (!trimmed.empty() && trimmed[0] == '#') {
                header += line + "\n";
                continue;
            }
        }
        if (hash != std::string::npos) stripped = stripped.substr(0, hash);
        std::istringstream ls(stripped);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok.front() == '[' && tok.back() == ']' && stripped.find('=') == std::string::npos) {
            section = tok;
            seen_section = true;
            if (section != "[variables]" && section != "[edges]" && section != "[equations]" &&
                section != "[exogenous]" && section != "[domains]")
                parse_fail(lineno, "unknown section " + section);
            continue;
        }
        if (section == "[variables]") {
            std::string role;
            if (!(ls >> role)) parse_fail(lineno, "expected 'name role'");
            try {
                verts.emplace_back(tok, role_from_string(role));
            } catch (const GraphError& e) {
                parse_fail(lineno, e.what());
            }
        } else if (section == "[edges]") {
            std::string arrow, to;
            if (!(ls >> arrow >> to)) parse_fail(lineno, "expected 'A -> B' or 'A <-> B'");
            if (arrow == "->")
                directed.emplace_back(tok, to);
            else if (arrow == "<->") {
                explicit_bidir.emplace_back(std::min(tok, to), std::max(tok, to));
                bidir_lines.emplace_back(lineno, tok + " <-> " + to);
            } else
                parse_fail(lineno, "unknown edge type '" + arrow + "'");
        } else if (section == "[equations]") {
            auto eq = stripped.find('=');
            if (eq == std::string::npos) parse_fail(lineno, "expected 'VAR = expression'");
            std::string lhs = stripped.substr(0, eq);
            std::string rhs = stripped.substr(eq + 1);
            std::istringstream lhs_s(lhs);
            std::string var, extra;
            if (!(lhs_s >> var) || (lhs_s >> extra)) parse_fail(lineno, "expected a single variable before '='");
            raw_eqs.push_back({var, rhs, lineno});
        } else if (section == "[exogenous]") {
            // NAME ~ kind(arg, ...)
            std::string tilde;
            if (!(ls >> tilde) || tilde != "~") parse_fail(lineno, "expected 'NAME ~ distribution(...)'");
            std::string rest;
            std::getline(ls, rest);
            auto open = rest.find('(');
            auto close = rest.rfind(')');
            if (open == std::string::npos || close == std::string::npos || close < open)
                parse_fail(lineno, "malformed distribution for '" + tok + "'");
            std::string kind = rest.substr(0, open);
            kind.erase(std::remove_if(kind.begin(), kind.end(), ::isspace), kind.end());
            std::string args_text = rest.substr(open + 1, close - open - 1);
            std::vector<double> args;
            std::istringstream as(args_text);
            std::string piece;
            while (std::getline(as, piece, ',')) {
                char* end = nullptr;
                double v = std::strtod(piece.c_str(), &end);
                if (end == piece.c_str()) parse_fail(lineno, "malformed number '" + piece + "'");
                args.push_back(v);
            }
            ExogenousSpec e;
            e.name = tok;
            if (kind == "gaussian") {
                if (args.size() != 2) parse_fail(lineno, "gaussian expects (mean, stddev)");
                e.kind = ExogenousSpec::Kind::kGaussian;
                e.mean = args[0];
                e.stddev = args[1];
                if (e.stddev <= 0) parse_fail(lineno, "stddev must be positive");
            } else if (kind == "tgaussian") {
                if (args.size() != 4) parse_fail(lineno, "tgaussian expects (mean, stddev, lo, hi)");
                e.kind = ExogenousSpec::Kind::kTruncatedGaussian;
                e.mean = args[0];
                e.stddev = args[1];
                e.lo = args[2];
                e.hi = args[3];
                if (e.stddev <= 0) parse_fail(lineno, "stddev must be positive");
                if (!(e.lo < e.hi)) parse_fail(lineno, "truncation bounds must satisfy lo < hi");
            } else if (kind == "uniform") {
                if (args.size() != 2) parse_fail(lineno, "uniform expects (lo, hi)");
                e.kind = ExogenousSpec::Kind::kUniform;
                e.lo = args[0];
                e.hi = args[1];
                if (!(e.lo < e.hi)) parse_fail(lineno, "uniform bounds must satisfy lo < hi");
            } else if (kind == "bernoulli") {
                if (args.size() != 1 && args.size() != 3)
                    parse_fail(lineno, "bernoulli expects (p) or (p, value0, value1)");
                e.kind = ExogenousSpec::Kind::kBernoulli;
                e.p = args[0];
                if (e.p < 0 || e.p > 1) parse_fail(lineno, "bernoulli p must lie in [0, 1]");
                if (args.size() == 3) {
                    e.value0 = args[1];
                    e.value1 = args[2];
                }
            } else {
                parse_fail(lineno, "unknown distribution '" + kind + "'");
            }
            exo.push_back(e);
            exo_lines.push_back(lineno);
        } else if (section == "[domains]") {
            // NAME in [lo, hi]
            std::string kw, rest;
            if (!(ls >> kw) || kw != "in") parse_fail(lineno, "expected 'NAME in [lo, hi]'");
            std::getline(ls, rest);
            double lo = 0, hi = 0;
            if (std::sscanf(rest.c_str(), " [ %lf , %lf ]", &lo, &hi) != 2)
                parse_fail(lineno, "expected 'NAME in [lo, hi]'");
            if (!(lo < hi)) parse_fail(lineno, "domain must satisfy lo < hi");
            if (domains.count(tok)) parse_fail(lineno, "duplicate domain for '" + tok + "'");
            domains[tok] = {lo, hi};
            domain_lines[tok] = lineno;
        } else {
            parse_fail(lineno, "content before any section header");
        }
    }

    CausalGraph base;
    try {
        base = CausalGraph::make(verts, directed, {});
    } catch (const GraphError& e) {
        throw ScmError(e.what());
    }

    std::set<std::string> exo_names;
    for (std::size_t i = 0; i < exo.size(); ++i) {
        if (!exo_names.insert(exo[i].name).second)
            parse_fail(exo_lines[i], "duplicate exogenous variable '" + exo[i].name + "'");
        try {
            base.index_of(exo[i].name);
            parse_fail(exo_lines[i], "exogenous name '" + exo[i].name + "' clashes with an endogenous variable");
        } catch (const GraphError&) {
        }
    }

    // Equations: one per endogenous variable, parent references matching edges.
    std::vector<StructuralEquation> eqs(static_cast<std::size_t>(base.size()));
    std::vector<bool> have(static_cast<std::size_t>(base.size()), false);
    std::map<std::string, std::set<std::string>> exo_users;
    for (const auto& raw : raw_eqs) {
        int v;
        try {
            v = base.index_of(raw.var);
        } catch (const GraphError&) {
            parse_fail(raw.line, "equation for undeclared variable '" + raw.var + "'");
        }
        if (have[static_cast<std::size_t>(v)]) parse_fail(raw.line, "duplicate equation for '" + raw.var + "'");
        StructuralEquation se;
        se.variable = raw.var;
        se.line = raw.line;
        try {
            se.expr = Expr::parse(raw.rhs);
        } catch (const ExprError& e) {
            parse_fail(raw.line, std::string("in equation for '") + raw.var + "': " + e.what());
        }
        se.text = se.expr.to_string();
        VSet parents = 0;
        for (const auto& ref : se.expr.variables()) {
            if (exo_names.count(ref)) {
                se.exo_refs.push_back(ref);
                exo_users[ref].insert(raw.var);
                continue;
            }
            int p;
            try {
                p = base.index_of(ref);
            } catch (const GraphError&) {
                parse_fail(raw.line, "equation for '" + raw.var + "' references undeclared name '" + ref + "'");
            }
            if (!base.has_directed_edge(p, v))
                parse_fail(raw.line, "equation for '" + raw.var + "' references '" + ref +
                                         "' which is not one of its parents");
            se.endo_refs.push_back(ref);
            parents |= vs_single(p);
        }
        if (parents != base.parents_of(vs_single(v))) {
            auto missing = base.to_names(base.parents_of(vs_single(v)) & ~parents);
            parse_fail(raw.line, "equation for '" + raw.var + "' does not use its parent '" + missing[0] + "'");
        }
        eqs[static_cast<std::size_t>(v)] = std::move(se);
        have[static_cast<std::size_t>(v)] = true;
    }
    for (int v = 0; v < base.size(); ++v)
        if (!have[static_cast<std::size_t>(v)])
            throw ScmError("missing equation for variable '" + base.name(v) + "'");

    // Bidirected edges are derived from shared exogenous variables.
    std::vector<std::pair<std::string, std::string>> derived_bidir;
    for (const auto& [exo_name, users] : exo_users) {
        if (users.size() < 2) continue;
        std::vector<std::string> list(users.begin(), users.end());
        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t j = i + 1; j < list.size(); ++j)
                derived_bidir.emplace_back(list[i], list[j]);
    }
    std::sort(derived_bidir.begin(), derived_bidir.end());
    derived_bidir.erase(std::unique(derived_bidir.begin(), derived_bidir.end()), derived_bidir.end());
    std::sort(explicit_bidir.begin(), explicit_bidir.end());
    explicit_bidir.erase(std::unique(explicit_bidir.begin(), explicit_bidir.end()), explicit_bidir.end());
    if (!explicit_bidir.empty() && explicit_bidir != derived_bidir) {
        int at = bidir_lines.empty() ? 0 : bidir_lines.front().first;
        throw ScmError("line " + std::to_string(at) +
                       ": declared bidirected edges do not match the confounders implied by shared "
                       "exogenous variables in the equations");
    }

    ScmSpec spec;
    spec.header_comment = header;
    try {
        spec.graph = CausalGraph::make(verts, directed, derived_bidir);
    } catch (const GraphError& e) {
        throw ScmError(e.what());
    }
    // re-index equations against the final graph (same vertex order)
    spec.equations = std::move(eqs);
    std::sort(exo.begin(), exo.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    spec.exogenous = std::move(exo);
    spec.domains = std::move(domains);

    for (const auto& [name, dom] : spec.domains) {
        int v;
        try {
            v = spec.graph.index_of(name);
        } catch (const GraphError&) {
            throw ScmError("line " + std::to_string(domain_lines[name]) + ": domain for undeclared variable '" +
                           name + "'");
        }
        if (spec.graph.role(v) != Role::kTreatment)
            throw ScmError("line " + std::to_string(domain_lines[name]) + ": domain declared for non-treatment '" +
                           name + "'");
        (void)dom;
    }
    for (const auto& nm : spec.graph.to_names(spec.graph.treatments()))
        if (!spec.domains.count(nm)) throw ScmError("missing interventional domain for treatment '" + nm + "'");
    if (spec.graph.targets() == 0) throw ScmError("spec declares no target variable");
    return spec;
}

std::string serialize_scm(const ScmSpec& spec) {
    std::ostringstream out;
    out << spec.header_comment;
    out << "[variables]\n";
    for (int v = 0; v < spec.graph.size(); ++v)
        out << spec.graph.name(v) << " " << role_name(spec.graph.role(v)) << "\n";
    out << "\n[edges]\n";
    std::vector<std::pair<std::string, std::string>> dir;
    for (auto [a, b] : spec.graph.directed_edges()) dir.emplace_back(spec.graph.name(a), spec.graph.name(b));
    std::sort(dir.begin(), dir.end());
    for (const auto& [a, b] : dir) out << a << " -> " << b << "\n";
    std::vector<std::pair<std::string, std::string>> bidir;
    for (auto [a, b] : spec.graph.bidirected_edges()) bidir.emplace_back(spec.graph.name(a), spec.graph.name(b));
    std::sort(bidir.begin(), bidir.end());
    for (const auto& [a, b] : bidir) out << a << " <-> " << b << "\n";
    out << "\n[equations]\n";
    for (const auto& eq : spec.equations) out << eq.variable << " = " << eq.text << "\n";
    out << "\n[exogenous]\n";
    for (const auto& e : spec.exogenous) {
        out << e.name << " ~ ";
        switch (e.kind) {
            case ExogenousSpec::Kind::kGaussian:
                out << "gaussian(" << fmt_num(e.mean) << ", " << fmt_num(e.stddev) << ")";
                break;
            case ExogenousSpec::Kind::kTruncatedGaussian:
                out << "tgaussian(" << fmt_num(e.mean) << ", " << fmt_num(e.stddev) << ", " << fmt_num(e.lo)
                    << ", " << fmt_num(e.hi) << ")";
                break;
            case ExogenousSpec::Kind::kUniform:
                out << "uniform(" << fmt_num(e.lo) << ", " << fmt_num(e.hi) << ")";
                break;
            case ExogenousSpec::Kind::kBernoulli:
                out << "bernoulli(" << fmt_num(e.p) << ", " << fmt_num(e.value0) << ", " << fmt_num(e.value1)
                    << ")";
                break;
        }
        out << "\n";
    }
    out << "\n[domains]\n";
    for (const auto& [name, dom] : spec.domains)
        out << name << " in [" << fmt_num(dom.first) << ", " << fmt_num(dom.second) << "]\n";
    return out.str();
}

bool operator==(const ScmSpec& a, const ScmSpec& b) { return serialize_scm(a) == serialize_scm(b); }

void validate_intervention(const ScmSpec& spec, const InterventionAssignment& iv) {
    if (iv.variables.size() != iv.values.size()) throw ScmError("intervention variables/values size mismatch");
    if (!std::is_sorted(iv.variables.begin(), iv.variables.end()))
        throw ScmError("intervention variables must be name-sorted");
    for (std::size_t i = 0; i < iv.variables.size(); ++i) {
        const std::string& name = iv.variables[i];
        if (i > 0 && iv.variables[i - 1] == name) throw ScmError("duplicate intervention variable '" + name + "'");
        int v = spec.graph.index_of(name);
        if (spec.graph.role(v) != Role::kTreatment)
            throw ScmError("cannot intervene on non-treatment variable '" + name + "'");
        auto it = spec.domains.find(name);
        if (it == spec.domains.end()) throw ScmError("no interventional domain for '" + name + "'");
        double v_lo = it->second.first, v_hi = it->second.second;
        if (!(iv.values[i] >= v_lo && iv.values[i] <= v_hi))
            throw ScmError("intervention value " + fmt_num(iv.values[i]) + " for '" + name +
                           "' lies outside its domain [" + fmt_num(v_lo) + ", " + fmt_num(v_hi) + "]");
    }
}

namespace {

// Pre-resolved evaluation plan shared by simulate() and interventional_mean().
struct EvalPlan {
    struct Step {
        int slot;         // endogenous slot to write
        const Expr* expr; // null for clamped variables
        double clamp = 0.0;
    };
    std::vector<Step> steps;                       // topological order
    std::vector<const ExogenousSpec*> exo_needed;  // those referenced by evaluated equations
    std::vector<int> exo_slots;
    int n_endo = 0;
    int n_slots = 0;
};

std::vector<int> topo_order(const CausalGraph& g) {
    std::vector<int> order;
    VSet done = 0;
    while (order.size() < static_cast<std::size_t>(g.size())) {
        bool progress = false;
        for (int v = 0; v < g.size(); ++v) {
            if (vs_contains(done, v)) continue;
            if ((g.parents_of(vs_single(v)) & ~done) == 0) {
                order.push_back(v);
                done |= vs_single(v);
                progress = true;
            }
        }
        if (!progress) throw ScmError("graph has a directed cycle");
    }
    return order;
}

EvalPlan build_plan(const ScmSpec& spec, const InterventionAssignment& iv, VSet needed_mask,
                    std::vector<Expr>& bound_storage) {
    const CausalGraph& g = spec.graph;
    EvalPlan plan;
    plan.n_endo = g.size();
    std::unordered_map<std::string, int> slot_of;
    for (int v = 0; v < g.size(); ++v) slot_of[g.name(v)] = v;
    for (std::size_t j = 0; j < spec.exogenous.size(); ++j)
        slot_of[spec.exogenous[j].name] = g.size() + static_cast<int>(j);
    plan.n_slots = g.size() + static_cast<int>(spec.exogenous.size());

    VSet clamped = 0;
    std::vector<double> clamp_value(static_cast<std::size_t>(g.size()), 0.0);
    for (std::size_t i = 0; i < iv.variables.size(); ++i) {
        int v = g.index_of(iv.variables[i]);
        clamped |= vs_single(v);
        clamp_value[static_cast<std::size_t>(v)] = iv.values[i];
    }

    std::set<std::string> exo_used;
    bound_storage.clear();
    bound_storage.reserve(static_cast<std::size_t>(g.size()));
    std::vector<int> order = topo_order(g);
    std::vector<const StructuralEquation*> eq_of(static_cast<std::size_t>(g.size()), nullptr);
    for (const auto& eq : spec.equations) eq_of[static_cast<std::size_t>(g.index_of(eq.variable))] = &eq;
    for (int v : order) {
        if (!vs_contains(needed_mask, v)) continue;
        if (vs_contains(clamped, v)) {
            plan.steps.push_back({v, nullptr, clamp_value[static_cast<std::size_t>(v)]});
            continue;
        }
        const StructuralEquation* eq = eq_of[static_cast<std::size_t>(v)];
        bound_storage.push_back(eq->expr);
        bound_storage.back().bind(slot_of);
        plan.steps.push_back({v, &bound_storage.back(), 0.0});
        for (const auto& exo_name : eq->exo_refs) exo_used.insert(exo_name);
    }
    for (std::size_t j = 0; j < spec.exogenous.size(); ++j) {
        if (exo_used.count(spec.exogenous[j].name)) {
            plan.exo_needed.push_back(&spec.exogenous[j]);
            plan.exo_slots.push_back(g.size() + static_cast<int>(j));
        }
    }
    return plan;
}

double sample_exogenous(const ExogenousSpec& e, Stream& s) {
    switch (e.kind) {
        case ExogenousSpec::Kind::kGaussian: return s.gaussian(e.mean, e.stddev);
        case ExogenousSpec::Kind::kTruncatedGaussian: return s.truncated_gaussian(e.mean, e.stddev, e.lo, e.hi);
        case ExogenousSpec::Kind::kUniform: return s.uniform(e.lo, e.hi);
        case ExogenousSpec::Kind::kBernoulli: return s.bernoulli(e.p) ? e.value1 : e.value0;
    }
    return 0.0;
}

void run_rows(const ScmSpec& spec, const EvalPlan& plan, int n, std::uint64_t seed,
              const std::function<void(int, const std::vector<double>&)>& consume_row) {
    std::vector<std::uint64_t> exo_base(plan.exo_needed.size());
    for (std::size_t j = 0; j < plan.exo_needed.size(); ++j)
        exo_base[j] = derive_seed(seed, "exo", plan.exo_needed[j]->name);
    std::vector<double> slots(static_cast<std::size_t>(plan.n_slots), 0.0);
    for (int row = 0; row < n; ++row) {
        for (std::size_t j = 0; j < plan.exo_needed.size(); ++j) {
            Stream s(derive_seed(exo_base[j], static_cast<std::uint64_t>(row)));
            slots[static_cast<std::size_t>(plan.exo_slots[j])] = sample_exogenous(*plan.exo_needed[j], s);
        }
        for (const auto& step : plan.steps) {
            if (step.expr == nullptr) {
                slots[static_cast<std::size_t>(step.slot)] = step.clamp;
                continue;
            }
            try {
                slots[static_cast<std::size_t>(step.slot)] = step.expr->eval(slots);
            } catch (const EvalError& e) {
                throw SimulationError("variable '" + spec.graph.name(step.slot) + "' failed at sample " +
                                      std::to_string(row) + ": " + e.what());
            }
        }
        consume_row(row, slots);
    }
}

}  // namespace

SampleMatrix simulate(const ScmSpec& spec, const InterventionAssignment& iv, int n, std::uint64_t seed) {
    if (n < 1) throw ScmError("simulate requires n >= 1");
    validate_intervention(spec, iv);
    std::vector<Expr> storage;
    EvalPlan plan = build_plan(spec, iv, spec.graph.all(), storage);
    SampleMatrix m;
    m.rows = n;
    for (int v = 0; v < spec.graph.size(); ++v) m.columns.push_back(spec.graph.name(v));
    m.values.resize(static_cast<std::size_t>(n) * m.columns.size());
    run_rows(spec, plan, n, seed, [&](int row, const std::vector<double>& slots) {
        for (std::size_t c = 0; c < m.columns.size(); ++c)
            m.values[static_cast<std::size_t>(row) * m.columns.size() + c] = slots[c];
    });
    return m;
}

MuVector interventional_mean(const ScmSpec& spec, const InterventionAssignment& iv, int n, std::uint64_t seed) {
    if (n < 2) throw ScmError("interventional_mean requires n >= 2");
    validate_intervention(spec, iv);
    const CausalGraph& g = spec.graph;
    CausalGraph cut = g.mutilate(g.to_set(iv.variables));
    VSet needed = cut.an_cap(g.targets());
    std::vector<Expr> storage;
    EvalPlan plan = build_plan(spec, iv, needed, storage);

    std::vector<int> target_idx;
    for (int v = 0; v < g.size(); ++v)
        if (vs_contains(g.targets(), v)) target_idx.push_back(v);
    std::size_t m = target_idx.size();
    std::vector<double> sum(m, 0.0), sumsq(m, 0.0);
    run_rows(spec, plan, n, seed, [&](int, const std::vector<double>& slots) {
        for (std::size_t i = 0; i < m; ++i) {
            double v = slots[static_cast<std::size_t>(target_idx[i])];
            sum[i] += v;
            sumsq[i] += v * v;
        }
    });
    MuVector mu;
    mu.mc_samples = n;
    for (std::size_t i = 0; i < m; ++i) {
        double mean = sum[i] / n;
        double var = (sumsq[i] - n * mean * mean) / (n - 1);
        if (var < 0) var = 0;
        mu.means.push_back(mean);
        mu.std_error.push_back(std::sqrt(var / n));
    }
    return mu;
}

GroundTruthFront ground_truth_front(const ScmSpec& spec, const std::vector<std::vector<std::string>>& sets,
                                    int grid_per_dim, int n_mc, std::uint64_t seed, int threads) {
    if (grid_per_dim < 2) throw ScmError("ground_truth_front requires grid_per_dim >= 2");
    if (n_mc < 2) throw ScmError("ground_truth_front requires n_mc >= 2");

    struct Job {
        std::string tag;
        InterventionAssignment iv;
    };
    std::vector<Job> jobs;
    double total = 0;
    for (const auto& set : sets) {
        std::vector<std::string> names = set;
        std::sort(names.begin(), names.end());
        total += std::pow(static_cast<double>(grid_per_dim), static_cast<double>(names.size()));
        if (total > 1e6)
            throw ScmError("ground-truth budget exceeded: more than 1e6 grid evaluations requested");
        std::string tag = "{}";
        if (!names.empty()) {
            tag.clear();
            for (std::size_t i = 0; i < names.size(); ++i) tag += (i ? "," : "") + names[i];
        }
        std::size_t d = names.size();
        std::vector<std::pair<double, double>> dom;
        for (const auto& nm : names) {
            auto it = spec.domains.find(nm);
            if (it == spec.domains.end()) throw ScmError("no interventional domain for '" + nm + "'");
            dom.push_back(it->second);
        }
        std::vector<int> counter(d, 0);
        for (;;) {
            InterventionAssignment iv;
            iv.variables = names;
            for (std::size_t k = 0; k < d; ++k) {
                double t = d == 0 ? 0.0 : static_cast<double>(counter[k]) / (grid_per_dim - 1);
                iv.values.push_back(dom[k].first + (dom[k].second - dom[k].first) * t);
            }
            jobs.push_back({tag, std::move(iv)});
            if (d == 0) break;
            std::size_t k = 0;
            while (k < d) {
                if (++counter[k] < grid_per_dim) break;
                counter[k] = 0;
                ++k;
            }
            if (k == d) break;
        }
    }

    std::uint64_t eval_seed = derive_seed(seed, "ground-truth");
    std::vector<MuVector> results(jobs.size());
    std::vector<std::string> errors;
    std::mutex err_mutex;
    int nthreads = std::max(1, threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                results[i] = interventional_mean(spec, jobs[i].iv, n_mc, eval_seed);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                errors.push_back(e.what());
            }
        }
    };
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!errors.empty()) throw SimulationError(errors.front());

    GroundTruthFront front;
    front.objective_names = spec.target_names();
    front.grid_per_dim = grid_per_dim;
    front.mc_samples = n_mc;
    std::vector<std::vector<double>> objs;
    objs.reserve(jobs.size());
    for (const auto& r : results) objs.push_back(r.means);
    std::vector<std::size_t> keep = non_dominated_indices(objs);
    for (std::size_t i : keep) {
        GroundTruthPoint p;
        p.set_tag = jobs[i].tag;
        p.x = jobs[i].iv.values;
        p.objectives = results[i].means;
        p.std_error = results[i].std_error;
        front.points.push_back(std::move(p));
    }
    return front;
}

}  // namespace cpareto
