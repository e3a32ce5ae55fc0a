#ifndef BPHZ_DIAGRAMS_RELATIONS_HPP
#define BPHZ_DIAGRAMS_RELATIONS_HPP

#include "../algebra/formal_sum.hpp"
#include "diagram.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bphz {

// Σ_{e~v} ∂^{δ_i}_{(e,v)} Γ; outgoing half-edges carry a minus sign, legs at v
// get their multiindex raised.
inline FormalSum ibp_combination(const Diagram& g, int v, int i) {
    const int d = g.dim();
    MultiIndex di = MultiIndex::unit(d, i);
    FormalSum out;
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        if (ed.src == v) {
            Diagram h = g;
            h.mutable_edge(e).deriv += di;
            out.add(h, Rational(-1));
        }
        if (ed.dst == v) {
            Diagram h = g;
            h.mutable_edge(e).deriv += di;
            out.add(h, Rational(1));
        }
    }
    for (int l = 0; l < g.num_legs(); ++l) {
        if (g.leg(l).vertex != v) continue;
        Diagram h = g;
        h.mutable_leg(l).deriv += di;
        out.add(h, Rational(1));
    }
    return out;
}

namespace detail {

inline Diagram with_decoration_lowered(const Diagram& g, int v, int i) {
    Diagram h = g;
    h.set_decoration(v, g.decoration(v) - MultiIndex::unit(g.dim(), i));
    return h;
}

inline Diagram with_root(const Diagram& g, int v) {
    Diagram h = g;
    h.clear_roots();
    h.add_root(v);
    return h;
}

}  // namespace detail

// Generators of the vacuum ideal for one connected rooted diagram: the
// decorated integration by parts away from and at the root, then leg moves.
inline std::vector<FormalSum> vacuum_relation_generators(const Diagram& g) {
    if (!g.vacuum_mode() || g.num_components() != 1) throw DiagramError("NotVacuum");
    const int d = g.dim();
    const int root = g.roots().front();
    std::vector<FormalSum> out;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (v == root) continue;
        for (int i = 0; i < d; ++i) {
            FormalSum s = ibp_combination(g, v, i);
            int n = g.decoration(v)[i];
            if (n > 0) s.add(detail::with_decoration_lowered(g, v, i), Rational(n));
            out.push_back(std::move(s));
        }
    }
    for (int i = 0; i < d; ++i) {
        FormalSum s = ibp_combination(g, root, i);
        for (int v = 0; v < g.num_vertices(); ++v) {
            if (v == root) continue;
            int n = g.decoration(v)[i];
            if (n > 0) s.add(detail::with_decoration_lowered(g, v, i), Rational(-n));
        }
        out.push_back(std::move(s));
    }
    // moving the root to v
    for (int v = 0; v < g.num_vertices(); ++v) {
        FormalSum s = FormalSum::single(g);
        std::vector<MultiIndex> m(g.num_vertices(), MultiIndex(d));
        std::function<void(int, Rational)> rec = [&](int u, Rational c) {
            if (u == g.num_vertices()) {
                Diagram h = detail::with_root(g, v);
                MultiIndex total(d);
                for (int w = 0; w < g.num_vertices(); ++w) {
                    total += m[w];
                    h.set_decoration(w, g.decoration(w) - m[w]);
                }
                h.set_decoration(root, h.decoration(root) + total);
                s.add(h, -c);
                return;
            }
            for (const auto& mm : multi_indices_below(g.decoration(u))) {
                m[u] = mm;
                Rational sign = mm.abs() % 2 ? Rational(-1) : Rational(1);
                rec(u + 1, c * sign * g.decoration(u).binom(mm));
            }
            m[u] = MultiIndex(d);
        };
        rec(0, Rational(1));
        out.push_back(std::move(s));
    }
    return out;
}

// Del_k: drop leg k if its multiindex vanishes, else the zero sum.
inline FormalSum delete_leg(const Diagram& g, int k) {
    auto comp = g.components();
    int c = comp[g.leg(k).vertex];
    int count = 0;
    for (const auto& l : g.legs()) count += comp[l.vertex] == c ? 1 : 0;
    if (count < 2) throw DiagramError("LastLegOfComponent");
    if (!g.leg(k).deriv.is_zero()) return FormalSum{};
    Diagram h = g;
    h.mutable_legs().erase(h.mutable_legs().begin() + k);
    return FormalSum::single(h);
}

// new leg i is old leg sigma[i]
inline Diagram permute_legs(const Diagram& g, const std::vector<int>& sigma) {
    if (static_cast<int>(sigma.size()) != g.num_legs()) throw std::invalid_argument("permutation size");
    std::vector<int> check(sigma);
    std::sort(check.begin(), check.end());
    for (int i = 0; i < static_cast<int>(check.size()); ++i)
        if (check[i] != i) throw std::invalid_argument("not a permutation");
    Diagram h = g;
    for (int i = 0; i < g.num_legs(); ++i) h.mutable_leg(i) = g.leg(sigma[i]);
    return h;
}

// Rewrite Γ modulo integration by parts so that leg k carries multiindex 0.
inline FormalSum reduce_leg(const Diagram& g, int k) {
    if (g.leg(k).deriv.is_zero()) return FormalSum::single(g);
    const int d = g.dim();
    int i = 0;
    while (g.leg(k).deriv[i] == 0) ++i;
    Diagram lowered = g;
    lowered.mutable_leg(k).deriv -= MultiIndex::unit(d, i);
    // IBP at the leg vertex of `lowered` contains g with coefficient +1
    FormalSum rest = ibp_combination(lowered, g.leg(k).vertex, i);
    rest.add(g, Rational(-1));
    FormalSum out;
    for (const auto& [key, t] : rest) {
        FormalSum r = reduce_leg(t.diagram, k);
        r *= -t.coef;
        out += r;
    }
    return out;
}

// Γ ⋆ Γ̄: last leg of Γ and first leg of Γ̄ removed, their vertices identified.
inline FormalSum star_compose(const Diagram& a, const Diagram& b) {
    if (a.num_legs() < 1 || b.num_legs() < 1) throw DiagramError("star_compose needs legs");
    FormalSum out;
    for (const auto& [ka, ta] : reduce_leg(a, a.num_legs() - 1)) {
        for (const auto& [kb, tb] : reduce_leg(b, 0)) {
            const Diagram& x = ta.diagram;
            const Diagram& y = tb.diagram;
            Diagram h = x;
            h.mutable_legs().pop_back();
            int u = x.leg(x.num_legs() - 1).vertex;
            int w = y.leg(0).vertex;
            std::vector<int> id(y.num_vertices(), -1);
            for (int v = 0; v < y.num_vertices(); ++v) id[v] = v == w ? u : h.add_vertex();
            for (const auto& e : y.edges()) h.add_edge(id[e.src], id[e.dst], e.label, e.deriv);
            for (int l = 1; l < y.num_legs(); ++l) h.add_leg(id[y.leg(l).vertex], y.leg(l).deriv);
            out.add(h, ta.coef * tb.coef);
        }
    }
    return out;
}

// identify all roots into the lowest one, summing decorations
inline Diagram glue(const Diagram& g) {
    if (!g.vacuum_mode()) throw DiagramError("NotVacuum");
    const auto& roots = g.roots();
    int r0 = roots.front();
    std::vector<int> id(g.num_vertices(), -1);
    Diagram h(g.dim());
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.is_root(v) && v != r0) continue;
        id[v] = h.add_vertex();
    }
    for (int r : roots) id[r] = id[r0];
    for (int v = 0; v < g.num_vertices(); ++v) h.set_decoration(id[v], h.decoration(id[v]) + g.decoration(v));
    h.add_root(id[r0]);
    for (const auto& e : g.edges()) h.add_edge(id[e.src], id[e.dst], e.label, e.deriv);
    return h;
}

}  // namespace bphz

#endif
