#ifndef BPHZ_DIAGRAMS_CONTRACT_HPP
#define BPHZ_DIAGRAMS_CONTRACT_HPP

#include "diagram.hpp"
#include "subgraph.hpp"

#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bphz {

// Diagram whose vertices and edges remember where they came from in some
// parent diagram. Edge origins survive contractions, which is what lets
// forest terms be matched back to the original graph.
struct TrackedDiagram {
    Diagram g;
    std::vector<int> vertex_origin;
    std::vector<int> edge_origin;

    static TrackedDiagram identity(const Diagram& g) {
        TrackedDiagram t{g, std::vector<int>(g.num_vertices()), std::vector<int>(g.num_edges())};
        std::iota(t.vertex_origin.begin(), t.vertex_origin.end(), 0);
        std::iota(t.edge_origin.begin(), t.edge_origin.end(), 0);
        return t;
    }
};

using HalfEdgeLabels = std::vector<std::pair<HalfEdge, MultiIndex>>;

struct ContractionResult {
    TrackedDiagram vacuum;
    TrackedDiagram quotient;
    bool vanishes = false;  // a fully contracted component kept a nonzero decoration
};

namespace detail {

// Drop vertices flagged in `drop`, renumbering the rest in order.
inline TrackedDiagram remove_vertices(const TrackedDiagram& t, const std::vector<bool>& drop) {
    const Diagram& g = t.g;
    std::vector<int> id(g.num_vertices(), -1);
    TrackedDiagram out{Diagram(g.dim()), {}, t.edge_origin};
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (drop[v]) continue;
        id[v] = out.g.add_vertex();
        out.g.set_decoration(id[v], g.decoration(v));
        out.vertex_origin.push_back(t.vertex_origin[v]);
        if (g.is_root(v)) out.g.add_root(id[v]);
    }
    for (const auto& e : g.edges()) {
        if (id[e.src] < 0 || id[e.dst] < 0) throw std::logic_error("edge at removed vertex");
        out.g.add_edge(id[e.src], id[e.dst], e.label, e.deriv);
    }
    for (const auto& l : g.legs()) {
        if (id[l.vertex] < 0) throw std::logic_error("leg at removed vertex");
        out.g.add_leg(id[l.vertex], l.deriv);
    }
    return out;
}

}  // namespace detail

// Extract the edge set S (any number of components) with half-edge labels ell
// on its boundary and the decoration split nbar (indexed by vertex, empty for
// none). The vacuum part carries nbar + pi(ell) and one root per component: the
// enclosing root if the component contains one, otherwise the vertex with
// the lowest origin. Each component is collapsed onto that same vertex.
inline ContractionResult contract(const TrackedDiagram& t, EdgeMask S, const HalfEdgeLabels& ell,
                                  const std::vector<MultiIndex>& nbar = {}) {
    const Diagram& g = t.g;
    const int d = g.dim();
    auto comps = edge_components(g, S);
    VertexMask vs = vertex_mask(g, S);

    std::vector<int> comp_of(g.num_vertices(), -1);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (int v : mask_to_list(vertex_mask(g, comps[c]))) comp_of[v] = static_cast<int>(c);

    std::vector<int> root_of(comps.size(), -1);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        int best = -1;
        for (int v : mask_to_list(vertex_mask(g, comps[c]))) {
            if (g.is_root(v)) {
                best = v;
                break;
            }
            if (best < 0 || t.vertex_origin[v] < t.vertex_origin[best]) best = v;
        }
        root_of[c] = best;
    }

    // ell per half-edge, defaulting to zero
    std::vector<MultiIndex> ell_src(g.num_edges(), MultiIndex(d)), ell_dst(g.num_edges(), MultiIndex(d));
    std::vector<MultiIndex> ell_leg(g.num_legs(), MultiIndex(d));
    std::vector<MultiIndex> pi(g.num_vertices(), MultiIndex(d));
    for (const auto& [h, m] : ell) {
        int v = half_edge_vertex(g, h);
        bool on_boundary = (vs >> v & 1u) && (h.is_leg || !has_edge(S, h.index));
        if (!on_boundary && !m.is_zero()) throw DiagramError("UnsupportedDecoration");
        if (h.is_leg)
            ell_leg[h.index] += m;
        else if (h.end == End::Source)
            ell_src[h.index] += m;
        else
            ell_dst[h.index] += m;
        pi[v] += m;
    }
    auto nb = [&](int v) { return nbar.empty() ? MultiIndex(d) : nbar[v]; };

    ContractionResult res;

    // vacuum part
    std::vector<int> vid(g.num_vertices(), -1);
    res.vacuum.g = Diagram(d);
    for (int v : mask_to_list(vs)) {
        vid[v] = res.vacuum.g.add_vertex();
        res.vacuum.g.set_decoration(vid[v], nb(v) + pi[v]);
        res.vacuum.vertex_origin.push_back(t.vertex_origin[v]);
    }
    for (int c = 0; c < static_cast<int>(comps.size()); ++c) res.vacuum.g.add_root(vid[root_of[c]]);
    for (int e : mask_to_list(S)) {
        const auto& ed = g.edge(e);
        res.vacuum.g.add_edge(vid[ed.src], vid[ed.dst], ed.label, ed.deriv);
        res.vacuum.edge_origin.push_back(t.edge_origin[e]);
    }

    // quotient: collapse each component onto its root
    auto target = [&](int v) { return comp_of[v] < 0 ? v : root_of[comp_of[v]]; };
    TrackedDiagram q{Diagram(d), t.vertex_origin, {}};
    for (int v = 0; v < g.num_vertices(); ++v) q.g.add_vertex();
    for (int v = 0; v < g.num_vertices(); ++v) {
        MultiIndex rest = g.decoration(v) - nb(v);
        int w = target(v);
        q.g.set_decoration(w, q.g.decoration(w) + rest);
        if (g.is_root(v)) q.g.add_root(w);
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        if (has_edge(S, e)) continue;
        const auto& ed = g.edge(e);
        q.g.add_edge(target(ed.src), target(ed.dst), ed.label, ed.deriv + ell_src[e] + ell_dst[e]);
        q.edge_origin.push_back(t.edge_origin[e]);
    }
    for (int l = 0; l < g.num_legs(); ++l) q.g.add_leg(target(g.leg(l).vertex), g.leg(l).deriv + ell_leg[l]);

    std::vector<bool> drop(g.num_vertices(), false);
    std::vector<int> touched(g.num_vertices(), 0);
    for (const auto& e : q.g.edges()) touched[e.src] = touched[e.dst] = 1;
    for (const auto& l : q.g.legs()) touched[l.vertex] = 1;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (comp_of[v] >= 0 && target(v) != v) {
            drop[v] = true;
            continue;
        }
        if (touched[v]) continue;
        // isolated: only possible for a component swallowed whole
        if (!q.g.is_root(v)) throw std::logic_error("isolated vertex without root");
        if (!q.g.decoration(v).is_zero()) res.vanishes = true;
        drop[v] = true;
    }
    res.quotient = detail::remove_vertices(q, drop);
    return res;
}

inline std::pair<Diagram, Diagram> contract(const Diagram& g, EdgeMask S, const HalfEdgeLabels& ell) {
    auto r = contract(TrackedDiagram::identity(g), S, ell);
    return {r.vacuum.g, r.quotient.g};
}

}  // namespace bphz

#endif
