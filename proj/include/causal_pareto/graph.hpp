#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cpareto {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Role { kTreatment, kTarget, kNonManipulative };

std::string role_name(Role r);
Role role_from_string(std::string_view s);

// Vertex sets are bitmasks over the graph's name-sorted vertex indices, which
// keeps all set algebra branch-free and every derived ordering deterministic.
using VSet = std::uint64_t;

inline bool vs_contains(VSet s, int i) { return (s >> i) & 1ULL; }
inline VSet vs_single(int i) { return 1ULL << i; }
int vs_count(VSet s);

// Acyclic directed mixed graph: directed edges plus bidirected edges standing
// for unobserved confounders, with a role attached to every vertex.
class CausalGraph {
  public:
    CausalGraph() = default;

    static CausalGraph make(const std::vector<std::pair<std::string, Role>>& vertices,
                            const std::vector<std::pair<std::string, std::string>>& directed,
                            const std::vector<std::pair<std::string, std::string>>& bidirected);

    // Text form: [variables] name role, [edges] "A -> B" / "A <-> B".
    static CausalGraph parse(const std::string& text);
    std::string serialize() const;

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    Role role(int i) const { return roles_[static_cast<std::size_t>(i)]; }
    int index_of(std::string_view name) const;  // GraphError if unknown

    VSet all() const { return size() == 64 ? ~0ULL : (1ULL << size()) - 1; }
    VSet treatments() const { return treatments_; }
    VSet targets() const { return targets_; }
    VSet non_manipulative() const { return non_manip_; }

    VSet to_set(const std::vector<std::string>& names) const;
    std::vector<std::string> to_names(VSet s) const;  // index (= name) order

    bool has_directed_edge(int from, int to) const;
    bool has_bidirected_edge(int a, int b) const;
    std::vector<std::pair<int, int>> directed_edges() const;
    std::vector<std::pair<int, int>> bidirected_edges() const;

    // pa/an/de exclude the argument unless it is reachable from another
    // member; the capitalized variants include the argument.
    VSet parents_of(VSet s) const;
    VSet pa_cap(VSet s) const { return parents_of(s) | s; }
    VSet ancestors_of(VSet s) const;
    VSet an_cap(VSet s) const { return ancestors_of(s) | s; }
    VSet descendants_of(VSet s) const;
    VSet de_cap(VSet s) const { return descendants_of(s) | s; }

    // c-component: union of bidirected-connected components touching s
    // (singletons with no confounder edge are their own component).
    VSet c_component_of(VSet s) const;

    // Restricted variants used by the territory fixpoint; traversal never
    // leaves `within` and s is assumed inside it.
    VSet descendants_within(VSet s, VSet within) const;  // includes s
    VSet c_component_within(VSet s, VSet within) const;  // includes s

    // do-graph: removes directed edges into s and bidirected edges incident
    // to s. Throws if s contains a non-treatment vertex.
    CausalGraph mutilate(VSet s) const;

    CausalGraph subgraph(VSet keep) const;

    // Minimal unobserved-confounders' territory of the graph's targets,
    // computed inside G[An(Y)]: least fixpoint of T <- De(CC(T)).
    VSet muct() const;

    // pa(MUCT) \ MUCT, parents taken in the full graph.
    VSet interventional_border() const;

    bool is_minimal_intervention_set(VSet s) const;
    bool is_pomis(VSet s) const;

    // Subset scan over P(X); throws if the treatment count exceeds the cap.
    std::vector<VSet> enumerate_pomis(int max_treatments = 20) const;
    std::vector<VSet> enumerate_mis(int max_treatments = 20) const;

    // Projects out the non-manipulative vertices, adding directed edges for
    // directed paths through them and bidirected edges for divergent
    // connections whose interior lies inside them.
    CausalGraph latent_project() const;

    // sorts a family of vertex sets lexicographically by member names
    std::vector<VSet> sort_family(std::vector<VSet> family) const;

  private:
    void validate_set(VSet s) const;
    VSet closure(VSet s, const std::vector<VSet>& step, VSet within, bool include_start) const;

    std::vector<std::string> names_;  // sorted
    std::vector<Role> roles_;
    std::vector<VSet> parent_mask_;   // parent_mask_[v] = set of parents of v
    std::vector<VSet> child_mask_;
    std::vector<VSet> sibling_mask_;  // bidirected adjacency
    VSet treatments_ = 0, targets_ = 0, non_manip_ = 0;
};

struct ConsistencyReport {
    bool ok = true;
    std::vector<std::string> failures;
};

// Brute-force cross-checks on a small graph: every border generated by a
// subset passes is_pomis, the border image equals the fixpoint enumeration,
// the territory is closed and subset-minimal, and every POMIS is a MIS.
ConsistencyReport check_pomis_consistency(const CausalGraph& g);

}  // namespace cpareto
