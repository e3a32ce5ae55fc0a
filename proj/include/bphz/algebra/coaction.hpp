#ifndef BPHZ_ALGEBRA_COACTION_HPP
#define BPHZ_ALGEBRA_COACTION_HPP

#include "../diagrams/contract.hpp"
#include "../diagrams/diagram.hpp"
#include "../diagrams/labels.hpp"
#include "../diagrams/subgraph.hpp"
#include "formal_sum.hpp"

#include <functional>
#include <vector>

namespace bphz {

struct Extraction {
    EdgeMask edges = 0;
    HalfEdgeLabels ell;
    std::vector<MultiIndex> nbar;  // per vertex of the parent
    Rational coef;
};

// Bare degree of one connected component: edges plus d(|V|-1), no decorations.
inline Rational bare_degree(const Diagram& g, const LabelTable& labels, EdgeMask comp) {
    Rational r(0);
    for (int e : mask_to_list(comp)) r += labels.deg(g.edge(e).label, g.edge(e).deriv);
    r += g.dim() * (popcount(vertex_mask(g, comp)) - 1);
    return r;
}

// All (ell, nbar) on the edge set S such that every component of
// (S, nbar + pi ell) has degree <= 0. nbar is only split off when
// split_decorations is set (vacuum diagrams).
inline void for_each_extraction(const Diagram& g, const LabelTable& labels, EdgeMask S, bool split_decorations,
                                const std::function<void(const Extraction&)>& f) {
    const int d = g.dim();
    auto comps = edge_components(g, S);
    std::vector<int> budget;
    for (auto c : comps) {
        Rational deg = bare_degree(g, labels, c);
        if (deg > 0) return;
        budget.push_back(static_cast<int>(floor_int(-deg)));
    }
    std::vector<int> comp_of(g.num_vertices(), -1);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (int v : mask_to_list(vertex_mask(g, comps[c]))) comp_of[v] = static_cast<int>(c);

    struct Slot {
        bool is_vertex;
        HalfEdge h;
        int vertex;
        int comp;
    };
    std::vector<Slot> slots;
    for (const auto& h : boundary_half_edges(g, Subgraph{S})) {
        int v = half_edge_vertex(g, h);
        slots.push_back({false, h, v, comp_of[v]});
    }
    if (split_decorations)
        for (int v : mask_to_list(vertex_mask(g, S)))
            if (!g.decoration(v).is_zero()) slots.push_back({true, {}, v, comp_of[v]});

    Extraction ex;
    ex.edges = S;
    ex.nbar.assign(g.num_vertices(), MultiIndex(d));
    std::vector<int> left = budget;
    std::function<void(std::size_t, Rational)> rec = [&](std::size_t i, Rational coef) {
        if (i == slots.size()) {
            ex.coef = coef;
            f(ex);
            return;
        }
        const Slot& s = slots[i];
        int& room = left[s.comp];
        std::vector<MultiIndex> choices =
            s.is_vertex ? multi_indices_below(g.decoration(s.vertex)) : multi_indices_up_to(d, room);
        for (const auto& m : choices) {
            int a = m.abs();
            if (a > room) continue;
            room -= a;
            Rational c = coef;
            if (s.is_vertex) {
                ex.nbar[s.vertex] = m;
                c *= g.decoration(s.vertex).binom(m);
                rec(i + 1, c);
                ex.nbar[s.vertex] = MultiIndex(d);
            } else {
                if (s.h.outgoing() && a % 2 == 1) c = -c;
                c /= m.factorial();
                if (!m.is_zero()) ex.ell.push_back({s.h, m});
                rec(i + 1, c);
                if (!m.is_zero()) ex.ell.pop_back();
            }
            room += a;
        }
    };
    rec(0, Rational(1));
}

// Δ Γ: sum over subgraphs (including empty) and admissible ell.
inline TensorSum coaction(const Diagram& g, const LabelTable& labels) {
    TensorSum out;
    auto tracked = TrackedDiagram::identity(g);
    EdgeMask all = all_edges(g);
    for (EdgeMask S = 0;; S = (S - all) & all) {
        for_each_extraction(g, labels, S, false, [&](const Extraction& ex) {
            auto r = contract(tracked, S, ex.ell);
            if (!r.vanishes) out.add(r.vacuum.g, r.quotient.g, ex.coef);
        });
        if (S == all) break;
    }
    return out;
}

inline bool all_components_divergent(const Diagram& v, const LabelTable& labels) {
    if (v.empty()) return true;
    for (auto c : edge_components(v, all_edges(v))) {
        Rational deg = bare_degree(v, labels, c);
        for (int x : mask_to_list(vertex_mask(v, c))) deg += v.decoration(x).abs();
        if (deg > 0) return false;
    }
    return true;
}

// Δ⁻ on a vacuum diagram. The left factor is always in the divergent sector;
// the right factor is projected too when project_right is set.
inline TensorSum coproduct_minus(const Diagram& g, const LabelTable& labels, bool project_right = false) {
    if (!g.empty() && !g.vacuum_mode()) throw DiagramError("NotVacuum");
    TensorSum out;
    if (g.empty()) {
        out.add(g, g, Rational(1));
        return out;
    }
    auto tracked = TrackedDiagram::identity(g);
    EdgeMask all = all_edges(g);
    for (EdgeMask S = 0;; S = (S - all) & all) {
        for_each_extraction(g, labels, S, true, [&](const Extraction& ex) {
            auto r = contract(tracked, S, ex.ell, ex.nbar);
            if (r.vanishes) return;
            if (project_right && !all_components_divergent(r.quotient.g, labels)) return;
            out.add(r.vacuum.g, r.quotient.g, ex.coef);
        });
        if (S == all) break;
    }
    return out;
}

// Δ⁻ minus τ⊗1 and 1⊗τ
inline TensorSum reduced_coproduct(const Diagram& g, const LabelTable& labels, bool project_right = false) {
    TensorSum full = coproduct_minus(g, labels, project_right);
    TensorSum out;
    for (const auto& [k, t] : full)
        if (t.left.num_edges() > 0 && t.right.num_edges() > 0) out.add(t.left, t.right, t.coef);
    return out;
}

}  // namespace bphz

#endif
