#ifndef BPHZ_ALGEBRA_FOREST_HPP
#define BPHZ_ALGEBRA_FOREST_HPP

#include "../diagrams/contract.hpp"
#include "../diagrams/subgraph.hpp"
#include "coaction.hpp"
#include "formal_sum.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bphz {

// All connected edge subsets: ESU enumeration on the line graph.
inline std::vector<Subgraph> connected_subgraphs(const Diagram& g) {
    const int m = g.num_edges();
    if (m > kMaxEdges) throw DiagramError("too many edges");
    std::vector<EdgeMask> adj(m, 0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            const auto& x = g.edge(a);
            const auto& y = g.edge(b);
            if (x.src == y.src || x.src == y.dst || x.dst == y.src || x.dst == y.dst) adj[a] |= edge_bit(b);
        }
    std::vector<Subgraph> out;
    std::function<void(EdgeMask, EdgeMask, EdgeMask, int)> extend = [&](EdgeMask sub, EdgeMask nbhd, EdgeMask ext,
                                                                          int s) {
        out.push_back({sub});
        while (ext) {
            int w = std::countr_zero(ext);
            ext &= ext - 1;
            EdgeMask excl = adj[w] & ~sub & ~nbhd;
            EdgeMask above = ~((edge_bit(s) << 1) - 1);
            extend(sub | edge_bit(w), nbhd | adj[w], ext | (excl & above), s);
        }
    };
    for (int s = 0; s < m; ++s) {
        EdgeMask above = ~((edge_bit(s) << 1) - 1);
        extend(edge_bit(s), adj[s] | edge_bit(s), adj[s] & above, s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct DivergentSubgraph {
    Subgraph subgraph;
    Rational degree;
};

// 𝒢⁻: connected subgraphs of degree <= 0, lexicographic on edge lists
inline std::vector<DivergentSubgraph> connected_divergent_subgraphs(const Diagram& g, const LabelTable& labels) {
    std::vector<DivergentSubgraph> out;
    for (const auto& s : connected_subgraphs(g)) {
        Rational deg = subgraph_degree(g, labels, s);
        if (deg <= 0) out.push_back({s, deg});
    }
    return out;
}

inline std::vector<Subgraph> divergent_list(const Diagram& g, const LabelTable& labels, bool full_only) {
    std::vector<Subgraph> out;
    for (const auto& d : connected_divergent_subgraphs(g, labels))
        if (!full_only || is_full(g, d.subgraph)) out.push_back(d.subgraph);
    return out;
}

inline bool nested_or_disjoint(const Diagram& g, const Subgraph& a, const Subgraph& b) {
    return a.contains(b) || b.contains(a) || vertex_disjoint(g, a, b);
}

struct Forest {
    std::vector<Subgraph> elements;  // sorted
    int size() const { return static_cast<int>(elements.size()); }
    bool contains(const Subgraph& s) const { return std::binary_search(elements.begin(), elements.end(), s); }
    friend bool operator==(const Forest&, const Forest&) = default;
    friend auto operator<=>(const Forest& a, const Forest& b) { return a.elements <=> b.elements; }
};

inline Forest make_forest(std::vector<Subgraph> els) {
    std::sort(els.begin(), els.end());
    els.erase(std::unique(els.begin(), els.end()), els.end());
    return Forest{std::move(els)};
}

inline bool is_forest(const Diagram& g, const std::vector<Subgraph>& els) {
    for (std::size_t i = 0; i < els.size(); ++i)
        for (std::size_t j = i + 1; j < els.size(); ++j)
            if (!nested_or_disjoint(g, els[i], els[j])) return false;
    return true;
}

inline Forest forest_union(const Forest& a, const Forest& b) {
    auto els = a.elements;
    els.insert(els.end(), b.elements.begin(), b.elements.end());
    return make_forest(std::move(els));
}

// All forests built from 𝒢⁻ (or its full part), including the empty one.
inline std::vector<Forest> forests(const Diagram& g, const LabelTable& labels, bool full_only) {
    auto cand = divergent_list(g, labels, full_only);
    const int n = static_cast<int>(cand.size());
    std::vector<std::vector<bool>> ok(n, std::vector<bool>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ok[i][j] = nested_or_disjoint(g, cand[i], cand[j]);
    std::vector<Forest> out;
    std::vector<int> chosen;
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            std::vector<Subgraph> els;
            for (int c : chosen) els.push_back(cand[c]);
            out.push_back(make_forest(std::move(els)));
            return;
        }
        rec(i + 1);
        for (int c : chosen)
            if (!ok[c][i]) return;
        chosen.push_back(i);
        rec(i + 1);
        chosen.pop_back();
    };
    rec(0);
    std::sort(out.begin(), out.end());
    return out;
}

// roots: elements not strictly contained in another element
inline std::vector<Subgraph> forest_roots(const std::vector<Subgraph>& els) {
    std::vector<Subgraph> out;
    for (const auto& a : els) {
        bool inside = false;
        for (const auto& b : els)
            if (!(a == b) && b.contains(a)) inside = true;
        if (!inside) out.push_back(a);
    }
    return out;
}

// smallest element strictly containing s, or nullopt for a root
inline std::optional<Subgraph> forest_parent(const Forest& f, const Subgraph& s) {
    std::optional<Subgraph> best;
    for (const auto& b : f.elements)
        if (!(b == s) && b.contains(s) && (!best || best->contains(b))) best = b;
    return best;
}

// Linear combination of tracked elements of 𝒯_Γ (no merging of equal terms).
struct WorkTerm {
    TrackedDiagram t;
    Rational coef;
};
using WorkSum = std::vector<WorkTerm>;

inline TrackedDiagram tracked_union(const TrackedDiagram& a, const TrackedDiagram& b) {
    TrackedDiagram u{disjoint_union(a.g, b.g), a.vertex_origin, a.edge_origin};
    if (a.g.empty()) u.g = b.g;
    if (b.g.empty()) u.g = a.g;
    u.vertex_origin.insert(u.vertex_origin.end(), b.vertex_origin.begin(), b.vertex_origin.end());
    u.edge_origin.insert(u.edge_origin.end(), b.edge_origin.begin(), b.edge_origin.end());
    return u;
}

// 𝒞_γ on one tracked diagram; γ given by original edge ids
inline WorkSum contraction_operator(const TrackedDiagram& w, const Subgraph& gamma, const LabelTable& labels) {
    WorkSum out;
    EdgeMask S = 0;
    for (int e = 0; e < w.g.num_edges(); ++e)
        if (has_edge(gamma.edges, w.edge_origin[e])) S |= edge_bit(e);
    if (popcount(S) != gamma.size()) throw std::logic_error("subgraph edges missing from tracked diagram");
    if (edge_components(w.g, S).size() != 1) return out;
    for_each_extraction(w.g, labels, S, true, [&](const Extraction& ex) {
        auto r = contract(w, S, ex.ell, ex.nbar);
        if (r.vanishes) return;
        out.push_back({tracked_union(r.quotient, r.vacuum), ex.coef});
    });
    return out;
}

inline WorkSum contraction_operator(const WorkSum& s, const Subgraph& gamma, const LabelTable& labels) {
    WorkSum out;
    for (const auto& term : s)
        for (auto& r : contraction_operator(term.t, gamma, labels)) out.push_back({std::move(r.t), r.coef * term.coef});
    return out;
}

// Split into (product of rooted components) ⊗ (components carrying legs).
inline std::pair<Diagram, Diagram> split_vacuum_part(const Diagram& g) {
    auto comp = g.components();
    int nc = g.num_components();
    std::vector<bool> rooted(nc, false);
    for (int r : g.roots()) rooted[comp[r]] = true;
    Diagram vac(g.dim()), rest(g.dim());
    std::vector<int> id(g.num_vertices(), -1);
    for (int v = 0; v < g.num_vertices(); ++v) {
        Diagram& h = rooted[comp[v]] ? vac : rest;
        id[v] = h.add_vertex();
        h.set_decoration(id[v], g.decoration(v));
        if (g.is_root(v)) h.add_root(id[v]);
    }
    for (const auto& e : g.edges()) (rooted[comp[e.src]] ? vac : rest).add_edge(id[e.src], id[e.dst], e.label, e.deriv);
    for (const auto& l : g.legs()) rest.add_leg(id[l.vertex], l.deriv);
    return {vac, rest};
}

inline TensorSum to_tensor_sum(const WorkSum& s) {
    TensorSum out;
    for (const auto& term : s) {
        auto [vac, rest] = split_vacuum_part(term.t.g);
        out.add(vac, rest, term.coef);
    }
    return out;
}

namespace detail {

// Apply operators layer by layer, outermost first. op(s, γ) acts on the sum.
inline WorkSum roots_first(WorkSum s, std::vector<Subgraph> els,
                           const std::function<WorkSum(const WorkSum&, const Subgraph&)>& op) {
    while (!els.empty()) {
        auto layer = forest_roots(els);
        for (const auto& g : layer) s = op(s, g);
        std::erase_if(els, [&](const Subgraph& x) { return std::find(layer.begin(), layer.end(), x) != layer.end(); });
    }
    return s;
}

inline void check_forest(const Diagram& g, const LabelTable& labels, const std::vector<Subgraph>& els) {
    if (!is_forest(g, els)) throw DiagramError("NotAForest");
    for (const auto& s : els)
        if (!is_connected(g, s) || subgraph_degree(g, labels, s) > 0) throw DiagramError("NotAForest");
}

}  // namespace detail

inline WorkSum contract_forest_tracked(const Diagram& g, const Forest& f, const LabelTable& labels) {
    detail::check_forest(g, labels, f.elements);
    WorkSum s{{TrackedDiagram::identity(g), Rational(1)}};
    return detail::roots_first(std::move(s), f.elements, [&](const WorkSum& x, const Subgraph& gamma) {
        return contraction_operator(x, gamma, labels);
    });
}

inline TensorSum contract_forest(const Diagram& g, const Forest& f, const LabelTable& labels) {
    return to_tensor_sum(contract_forest_tracked(g, f, labels));
}

// Σ_F (-1)^{|F|} 𝒞_F Γ over all forests (or full forests)
inline WorkSum forest_formula_tracked(const Diagram& g, const LabelTable& labels, bool full_only = false) {
    WorkSum out;
    for (const auto& f : forests(g, labels, full_only)) {
        Rational sign = f.size() % 2 ? Rational(-1) : Rational(1);
        for (auto& t : contract_forest_tracked(g, f, labels)) out.push_back({std::move(t.t), t.coef * sign});
    }
    return out;
}

inline TensorSum forest_formula(const Diagram& g, const LabelTable& labels, bool full_only = false) {
    return to_tensor_sum(forest_formula_tracked(g, labels, full_only));
}

struct ForestInterval {
    Forest lower;
    Forest delta;
    Forest upper() const { return forest_union(lower, delta); }
    // F lies in [lower, lower ∪ delta]
    bool contains(const Forest& f) const {
        for (const auto& s : lower.elements)
            if (!f.contains(s)) return false;
        auto up = upper();
        for (const auto& s : f.elements)
            if (!up.contains(s)) return false;
        return true;
    }
};

// ℛ_𝕄 Γ: (id - 𝒞_γ) for γ in delta, (-𝒞_γ) for γ in lower, outermost first
inline WorkSum forest_interval_term_tracked(const Diagram& g, const ForestInterval& m, const LabelTable& labels) {
    for (const auto& s : m.delta.elements)
        if (m.lower.contains(s)) throw DiagramError("NotAForest");
    auto up = m.upper();
    detail::check_forest(g, labels, up.elements);
    WorkSum s{{TrackedDiagram::identity(g), Rational(1)}};
    return detail::roots_first(std::move(s), up.elements, [&](const WorkSum& x, const Subgraph& gamma) {
        WorkSum c = contraction_operator(x, gamma, labels);
        for (auto& t : c) t.coef = -t.coef;
        if (m.delta.contains(gamma)) c.insert(c.begin(), x.begin(), x.end());
        return c;
    });
}

inline TensorSum forest_interval_term(const Diagram& g, const ForestInterval& m, const LabelTable& labels) {
    return to_tensor_sum(forest_interval_term_tracked(g, m, labels));
}

// each forest of the family lies in exactly one interval
inline bool is_interval_partition(const std::vector<Forest>& family, const std::vector<ForestInterval>& parts) {
    std::size_t total = 0;
    for (const auto& p : parts) {
        for (const auto& s : p.delta.elements)
            if (p.lower.contains(s)) return false;
        total += std::size_t(1) << p.delta.size();
    }
    for (const auto& f : family) {
        int hits = 0;
        for (const auto& p : parts) hits += p.contains(f) ? 1 : 0;
        if (hits != 1) return false;
    }
    return total == family.size();
}

inline TensorSum interval_resummation(const Diagram& g, const std::vector<ForestInterval>& parts,
                                      const LabelTable& labels, bool full_only = false) {
    if (!is_interval_partition(forests(g, labels, full_only), parts)) throw DiagramError("NotAPartition");
    TensorSum out;
    for (const auto& p : parts) out += forest_interval_term(g, p, labels);
    return out;
}

// Σ_{ℓ: π_*ℓ = m} binom(k, ℓ) = binom(π_*k, m) for every m <= π_*k
inline bool chu_vandermonde_check(const std::vector<int>& pi, const std::vector<MultiIndex>& k, int target_size) {
    if (pi.size() != k.size() || k.empty()) throw std::invalid_argument("size mismatch");
    const int d = k[0].dim();
    std::vector<MultiIndex> pk(target_size, MultiIndex(d));
    for (std::size_t s = 0; s < k.size(); ++s) pk.at(pi[s]) += k[s];
    std::map<std::vector<MultiIndex>, Rational> lhs;
    std::vector<MultiIndex> ell(k.size(), MultiIndex(d));
    std::function<void(std::size_t)> rec = [&](std::size_t s) {
        if (s == k.size()) {
            std::vector<MultiIndex> push(target_size, MultiIndex(d));
            Rational c(1);
            for (std::size_t i = 0; i < k.size(); ++i) {
                push[pi[i]] += ell[i];
                c *= k[i].binom(ell[i]);
            }
            lhs[push] += c;
            return;
        }
        for (const auto& m : multi_indices_below(k[s])) {
            ell[s] = m;
            rec(s + 1);
        }
    };
    rec(0);
    for (const auto& [m, c] : lhs) {
        Rational rhs(1);
        for (int t = 0; t < target_size; ++t) rhs *= pk[t].binom(m[t]);
        if (rhs != c) return false;
    }
    return true;
}

}  // namespace bphz

#endif
