#include "causal_pareto/graph.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <sstream>

namespace cpareto {

int vs_count(VSet s) { return std::popcount(s); }

std::string role_name(Role r) {
    switch (r) {
        case Role::kTreatment: return "treatment";
        case Role::kTarget: return "target";
        case Role::kNonManipulative: return "nonmanipulative";
    }
    return "?";
}

Role role_from_string(std::string_view s) {
    if (s == "treatment") return Role::kTreatment;
    if (s == "target") return Role::kTarget;
    if (s == "nonmanipulative" || s == "non-manipulative" || s == "non_manipulative")
        return Role::kNonManipulative;
    throw GraphError("unknown role '" + std::string(s) + "'");
}

CausalGraph CausalGraph::make(const std::vector<std::pair<std::string, Role>>& vertices,
                              const std::vector<std::pair<std::string, std::string>>& directed,
                              const std::vector<std::pair<std::string, std::string>>& bidirected) {
    CausalGraph g;
    std::vector<std::pair<std::string, Role>> sorted = vertices;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [name, role] : sorted) {
        if (name.empty()) throw GraphError("empty variable name");
        if (!g.names_.empty() && g.names_.back() == name)
            throw GraphError("duplicate variable '" + name + "'");
        g.names_.push_back(name);
        g.roles_.push_back(role);
    }
    if (g.size() > 64) throw GraphError("graphs are limited to 64 vertices");
    int n = g.size();
    g.parent_mask_.assign(static_cast<std::size_t>(n), 0);
    g.child_mask_.assign(static_cast<std::size_t>(n), 0);
    g.sibling_mask_.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        switch (g.roles_[static_cast<std::size_t>(i)]) {
            case Role::kTreatment: g.treatments_ |= vs_single(i); break;
            case Role::kTarget: g.targets_ |= vs_single(i); break;
            case Role::kNonManipulative: g.non_manip_ |= vs_single(i); break;
        }
    }
    for (const auto& [from, to] : directed) {
        int a = g.index_of(from), b = g.index_of(to);
        if (a == b) throw GraphError("self-loop on '" + from + "'");
        g.parent_mask_[static_cast<std::size_t>(b)] |= vs_single(a);
        g.child_mask_[static_cast<std::size_t>(a)] |= vs_single(b);
    }
    for (const auto& [u, v] : bidirected) {
        int a = g.index_of(u), b = g.index_of(v);
        if (a == b) throw GraphError("bidirected self-loop on '" + u + "'");
        g.sibling_mask_[static_cast<std::size_t>(a)] |= vs_single(b);
        g.sibling_mask_[static_cast<std::size_t>(b)] |= vs_single(a);
    }
    // acyclicity of the directed part
    VSet removed = 0;
    for (;;) {
        bool progress = false;
        for (int v = 0; v < n; ++v) {
            if (vs_contains(removed, v)) continue;
            if ((g.parent_mask_[static_cast<std::size_t>(v)] & ~removed) == 0) {
                removed |= vs_single(v);
                progress = true;
            }
        }
        if (removed == g.all()) break;
        if (!progress) throw GraphError("directed part of the graph has a cycle");
    }
    return g;
}

int CausalGraph::index_of(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) throw GraphError("unknown variable '" + std::string(name) + "'");
    return static_cast<int>(it - names_.begin());
}

VSet CausalGraph::to_set(const std::vector<std::string>& names) const {
    VSet s = 0;
    for (const auto& nm : names) s |= vs_single(index_of(nm));
    return s;
}

std::vector<std::string> CausalGraph::to_names(VSet s) const {
    std::vector<std::string> out;
    for (int i = 0; i < size(); ++i)
        if (vs_contains(s, i)) out.push_back(names_[static_cast<std::size_t>(i)]);
    return out;
}

bool CausalGraph::has_directed_edge(int from, int to) const {
    return vs_contains(parent_mask_[static_cast<std::size_t>(to)], from);
}

bool CausalGraph::has_bidirected_edge(int a, int b) const {
    return vs_contains(sibling_mask_[static_cast<std::size_t>(a)], b);
}

std::vector<std::pair<int, int>> CausalGraph::directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < size(); ++v)
        for (int p = 0; p < size(); ++p)
            if (has_directed_edge(p, v)) out.emplace_back(p, v);
    return out;
}

std::vector<std::pair<int, int>> CausalGraph::bidirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < size(); ++a)
        for (int b = a + 1; b < size(); ++b)
            if (has_bidirected_edge(a, b)) out.emplace_back(a, b);
    return out;
}

void CausalGraph::validate_set(VSet s) const {
    if ((s & ~all()) != 0) throw GraphError("vertex set contains unknown vertex bits");
}

VSet CausalGraph::parents_of(VSet s) const {
    validate_set(s);
    VSet out = 0;
    for (int v = 0; v < size(); ++v)
        if (vs_contains(s, v)) out |= parent_mask_[static_cast<std::size_t>(v)];
    return out;
}

VSet CausalGraph::closure(VSet s, const std::vector<VSet>& step, VSet within, bool include_start) const {
    VSet result = include_start ? (s & within) : 0;
    VSet expand = s & within;
    while (expand) {
        VSet next = 0;
        for (int v = 0; v < size(); ++v)
            if (vs_contains(expand, v)) next |= step[static_cast<std::size_t>(v)];
        next &= within;
        expand = next & ~result;
        result |= expand;
    }
    return result;
}

VSet CausalGraph::ancestors_of(VSet s) const {
    validate_set(s);
    return closure(s, parent_mask_, all(), false);
}

VSet CausalGraph::descendants_of(VSet s) const {
    validate_set(s);
    return closure(s, child_mask_, all(), false);
}

VSet CausalGraph::descendants_within(VSet s, VSet within) const {
    return closure(s, child_mask_, within, true);
}

VSet CausalGraph::c_component_of(VSet s) const {
    validate_set(s);
    return c_component_within(s, all());
}

VSet CausalGraph::c_component_within(VSet s, VSet within) const {
    VSet seen = s & within;
    VSet frontier = seen;
    while (frontier) {
        VSet next = 0;
        for (int v = 0; v < size(); ++v)
            if (vs_contains(frontier, v)) next |= sibling_mask_[static_cast<std::size_t>(v)];
        next &= within;
        frontier = next & ~seen;
        seen |= frontier;
    }
    return seen;
}

CausalGraph CausalGraph::mutilate(VSet s) const {
    validate_set(s);
    if ((s & ~treatments_) != 0)
        throw GraphError("intervention set contains a non-treatment variable: " +
                         (to_names(s & ~treatments_).empty() ? std::string("?") : to_names(s & ~treatments_)[0]));
    CausalGraph g = *this;
    for (int v = 0; v < size(); ++v) {
        if (vs_contains(s, v)) {
            for (int p = 0; p < size(); ++p)
                g.child_mask_[static_cast<std::size_t>(p)] &= ~vs_single(v);
            g.parent_mask_[static_cast<std::size_t>(v)] = 0;
            for (int u = 0; u < size(); ++u)
                g.sibling_mask_[static_cast<std::size_t>(u)] &= ~vs_single(v);
            g.sibling_mask_[static_cast<std::size_t>(v)] = 0;
        }
    }
    return g;
}

CausalGraph CausalGraph::subgraph(VSet keep) const {
    validate_set(keep);
    std::vector<std::pair<std::string, Role>> verts;
    std::vector<std::pair<std::string, std::string>> dir, bidir;
    for (int v = 0; v < size(); ++v)
        if (vs_contains(keep, v)) verts.emplace_back(name(v), role(v));
    for (auto [a, b] : directed_edges())
        if (vs_contains(keep, a) && vs_contains(keep, b)) dir.emplace_back(name(a), name(b));
    for (auto [a, b] : bidirected_edges())
        if (vs_contains(keep, a) && vs_contains(keep, b)) bidir.emplace_back(name(a), name(b));
    return make(verts, dir, bidir);
}

VSet CausalGraph::muct() const {
    if (targets_ == 0) throw GraphError("graph has no target variable");
    VSet h = an_cap(targets_);
    VSet t = targets_;
    for (;;) {
        VSet cc = c_component_within(t, h);
        VSet t2 = descendants_within(cc, h);
        if (t2 == t) return t;
        t = t2;
    }
}

VSet CausalGraph::interventional_border() const {
    VSet t = muct();
    return parents_of(t) & ~t;
}

bool CausalGraph::is_minimal_intervention_set(VSet s) const {
    validate_set(s);
    if ((s & ~treatments_) != 0) throw GraphError("intervention set contains a non-treatment variable");
    if (targets_ == 0) throw GraphError("graph has no target variable");
    CausalGraph cut = mutilate(s);
    VSet an_y = cut.ancestors_of(cut.targets_);
    return (s & ~an_y) == 0;
}

bool CausalGraph::is_pomis(VSet s) const {
    validate_set(s);
    if ((s & ~treatments_) != 0) throw GraphError("intervention set contains a non-treatment variable");
    return mutilate(s).interventional_border() == s;
}

std::vector<VSet> CausalGraph::enumerate_pomis(int max_treatments) const {
    if (targets_ == 0) throw GraphError("graph has no target variable");
    int t = vs_count(treatments_);
    if (t > max_treatments)
        throw GraphError("search space too large: " + std::to_string(t) + " treatments exceeds cap of " +
                         std::to_string(max_treatments));
    std::vector<int> idx;
    for (int v = 0; v < size(); ++v)
        if (vs_contains(treatments_, v)) idx.push_back(v);
    std::vector<VSet> family;
    for (std::uint64_t bits = 0; bits < (1ULL << t); ++bits) {
        VSet s = 0;
        for (int k = 0; k < t; ++k)
            if ((bits >> k) & 1ULL) s |= vs_single(idx[static_cast<std::size_t>(k)]);
        if (is_pomis(s)) family.push_back(s);
    }
    return sort_family(std::move(family));
}

std::vector<VSet> CausalGraph::enumerate_mis(int max_treatments) const {
    if (targets_ == 0) throw GraphError("graph has no target variable");
    int t = vs_count(treatments_);
    if (t > max_treatments)
        throw GraphError("search space too large: " + std::to_string(t) + " treatments exceeds cap of " +
                         std::to_string(max_treatments));
    std::vector<int> idx;
    for (int v = 0; v < size(); ++v)
        if (vs_contains(treatments_, v)) idx.push_back(v);
    std::vector<VSet> family;
    for (std::uint64_t bits = 0; bits < (1ULL << t); ++bits) {
        VSet s = 0;
        for (int k = 0; k < t; ++k)
            if ((bits >> k) & 1ULL) s |= vs_single(idx[static_cast<std::size_t>(k)]);
        if (is_minimal_intervention_set(s)) family.push_back(s);
    }
    return sort_family(std::move(family));
}

std::vector<VSet> CausalGraph::sort_family(std::vector<VSet> family) const {
    std::sort(family.begin(), family.end(), [this](VSet a, VSet b) { return to_names(a) < to_names(b); });
    family.erase(std::unique(family.begin(), family.end()), family.end());
    return family;
}

CausalGraph CausalGraph::latent_project() const {
    VSet c = non_manip_;
    if (c == 0) return *this;
    VSet kept = all() & ~c;

    // c_anc[v] = {v} plus the C-vertices with a directed path to v running
    // entirely through C.
    std::vector<VSet> c_anc(static_cast<std::size_t>(size()), 0);
    for (int v = 0; v < size(); ++v) {
        VSet seen = vs_single(v);
        VSet frontier = parent_mask_[static_cast<std::size_t>(v)] & c;
        seen |= frontier;
        while (frontier) {
            VSet next = 0;
            for (int u = 0; u < size(); ++u)
                if (vs_contains(frontier, u)) next |= parent_mask_[static_cast<std::size_t>(u)] & c;
            frontier = next & ~seen;
            seen |= frontier;
        }
        c_anc[static_cast<std::size_t>(v)] = seen;
    }

    std::vector<std::pair<std::string, Role>> verts;
    for (int v = 0; v < size(); ++v)
        if (vs_contains(kept, v)) verts.emplace_back(name(v), role(v));

    std::vector<std::pair<std::string, std::string>> dir, bidir;
    for (int b = 0; b < size(); ++b) {
        if (!vs_contains(kept, b)) continue;
        // a -> b iff a is a parent of b or of a C-ancestor chain of b
        VSet direct_parents = 0;
        for (int u = 0; u < size(); ++u)
            if (vs_contains(c_anc[static_cast<std::size_t>(b)], u))
                direct_parents |= parent_mask_[static_cast<std::size_t>(u)];
        direct_parents &= kept;
        for (int a = 0; a < size(); ++a)
            if (vs_contains(direct_parents, a) && a != b) dir.emplace_back(name(a), name(b));
    }
    for (int a = 0; a < size(); ++a) {
        if (!vs_contains(kept, a)) continue;
        for (int b = a + 1; b < size(); ++b) {
            if (!vs_contains(kept, b)) continue;
            VSet ca = c_anc[static_cast<std::size_t>(a)], cb = c_anc[static_cast<std::size_t>(b)];
            // common C-vertex source: a <- ... c ... -> b
            bool connected = ((ca & cb & c) != 0);
            // bidirected edge between the two C-closures
            for (int u = 0; u < size() && !connected; ++u)
                if (vs_contains(ca, u) && (sibling_mask_[static_cast<std::size_t>(u)] & cb) != 0)
                    connected = true;
            if (connected) bidir.emplace_back(name(a), name(b));
        }
    }
    return make(verts, dir, bidir);
}

namespace {

std::string set_to_string(const CausalGraph& g, VSet s) {
    std::string out = "{";
    bool first = true;
    for (const auto& nm : g.to_names(s)) {
        if (!first) out += ",";
        out += nm;
        first = false;
    }
    return out + "}";
}

}  // namespace

ConsistencyReport check_pomis_consistency(const CausalGraph& g) {
    if (g.size() > 12) throw GraphError("consistency check is limited to graphs with at most 12 vertices");
    ConsistencyReport rep;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.failures.push_back(std::move(msg));
    };

    std::vector<int> tr;
    for (int v = 0; v < g.size(); ++v)
        if (vs_contains(g.treatments(), v)) tr.push_back(v);
    int t = static_cast<int>(tr.size());

    std::vector<VSet> border_image;
    for (std::uint64_t bits = 0; bits < (1ULL << t); ++bits) {
        VSet s = 0;
        for (int k = 0; k < t; ++k)
            if ((bits >> k) & 1ULL) s |= vs_single(tr[static_cast<std::size_t>(k)]);
        VSet border = g.mutilate(s).interventional_border();
        border_image.push_back(border);
        if (!g.is_pomis(border))
            fail("border of subset " + set_to_string(g, s) + " fails is_pomis: " + set_to_string(g, border));
    }
    std::vector<VSet> image_family = g.sort_family(border_image);
    std::vector<VSet> fixpoint_family = g.enumerate_pomis();
    if (image_family != fixpoint_family)
        fail("border image and fixpoint enumeration disagree");

    // MUCT closure and brute-force minimality inside H = G[An(Y)]
    VSet y = g.targets();
    VSet h = g.an_cap(y);
    VSet t_star = g.muct();
    if (g.descendants_within(t_star, h) != t_star || g.c_component_within(t_star, h) != t_star)
        fail("MUCT is not closed under descendants/c-component");
    VSet extra = t_star & ~y;
    std::vector<int> extra_idx;
    for (int v = 0; v < g.size(); ++v)
        if (vs_contains(extra, v)) extra_idx.push_back(v);
    int e = static_cast<int>(extra_idx.size());
    for (std::uint64_t bits = 0; bits + 1 < (1ULL << e); ++bits) {  // all strict subsets of extra
        VSet sub = y;
        for (int k = 0; k < e; ++k)
            if ((bits >> k) & 1ULL) sub |= vs_single(extra_idx[static_cast<std::size_t>(k)]);
        if (g.descendants_within(sub, h) == sub && g.c_component_within(sub, h) == sub) {
            fail("MUCT not minimal: " + set_to_string(g, sub) + " is a smaller closed territory");
            break;
        }
    }

    for (VSet s : fixpoint_family)
        if (!g.is_minimal_intervention_set(s))
            fail("POMIS " + set_to_string(g, s) + " is not a minimal intervention set");

    return rep;
}

CausalGraph CausalGraph::parse(const std::string& text) {
    std::vector<std::pair<std::string, Role>> verts;
    std::vector<std::pair<std::string, std::string>> dir, bidir;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok.front() == '[') {
            section = tok;
            continue;
        }
        if (section == "[variables]") {
            std::string role;
            if (!(ls >> role))
                throw GraphError("line " + std::to_string(lineno) + ": expected 'name role'");
            verts.emplace_back(tok, role_from_string(role));
        } else if (section == "[edges]") {
            std::string arrow, to;
            if (!(ls >> arrow >> to))
                throw GraphError("line " + std::to_string(lineno) + ": expected 'A -> B' or 'A <-> B'");
            if (arrow == "->")
                dir.emplace_back(tok, to);
            else if (arrow == "<->")
                bidir.emplace_back(tok, to);
            else
                throw GraphError("line " + std::to_string(lineno) + ": unknown edge type '" + arrow + "'");
        } else if (section.empty()) {
            throw GraphError("line " + std::to_string(lineno) + ": content before any section header");
        }
        // other sections ([equations], ...) belong to the SCM layer
    }
    return make(verts, dir, bidir);
}

std::string CausalGraph::serialize() const {
    std::ostringstream out;
    out << "[variables]\n";
    for (int v = 0; v < size(); ++v) out << name(v) << " " << role_name(role(v)) << "\n";
    out << "\n[edges]\n";
    for (auto [a, b] : directed_edges()) out << name(a) << " -> " << name(b) << "\n";
    for (auto [a, b] : bidirected_edges()) out << name(a) << " <-> " << name(b) << "\n";
    return out.str();
}

}  // namespace cpareto
