#ifndef BPHZ_DIAGRAMS_SUBGRAPH_HPP
#define BPHZ_DIAGRAMS_SUBGRAPH_HPP

#include "diagram.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bphz {

using EdgeMask = std::uint64_t;
using VertexMask = std::uint64_t;

inline constexpr int kMaxEdges = 63;

inline EdgeMask edge_bit(int e) { return EdgeMask(1) << e; }
inline bool has_edge(EdgeMask m, int e) { return (m >> e) & 1u; }
inline int popcount(std::uint64_t m) { return std::popcount(m); }

inline std::vector<int> mask_to_list(std::uint64_t m) {
    std::vector<int> out;
    while (m) {
        out.push_back(std::countr_zero(m));
        m &= m - 1;
    }
    return out;
}
inline std::uint64_t list_to_mask(const std::vector<int>& v) {
    std::uint64_t m = 0;
    for (int x : v) m |= std::uint64_t(1) << x;
    return m;
}

inline EdgeMask all_edges(const Diagram& g) {
    if (g.num_edges() > kMaxEdges) throw DiagramError("too many edges");
    return g.num_edges() == 64 ? ~EdgeMask(0) : (EdgeMask(1) << g.num_edges()) - 1;
}

// A subgraph is a set of internal edges; its vertices are their endpoints.
struct Subgraph {
    EdgeMask edges = 0;
    bool empty() const { return edges == 0; }
    int size() const { return popcount(edges); }
    bool contains(const Subgraph& o) const { return (o.edges & ~edges) == 0; }
    friend bool operator==(const Subgraph&, const Subgraph&) = default;
    friend auto operator<=>(const Subgraph& a, const Subgraph& b) {
        // lexicographic on sorted edge lists
        return mask_to_list(a.edges) <=> mask_to_list(b.edges);
    }
};

inline VertexMask vertex_mask(const Diagram& g, EdgeMask edges) {
    VertexMask v = 0;
    for (int e : mask_to_list(edges)) {
        v |= VertexMask(1) << g.edge(e).src;
        v |= VertexMask(1) << g.edge(e).dst;
    }
    return v;
}
inline std::vector<int> vertices_of(const Diagram& g, const Subgraph& s) {
    return mask_to_list(vertex_mask(g, s.edges));
}

// connected components of an edge set, as edge masks ordered by lowest vertex
inline std::vector<EdgeMask> edge_components(const Diagram& g, EdgeMask edges) {
    std::vector<EdgeMask> comps;
    EdgeMask left = edges;
    while (left) {
        int first = std::countr_zero(left);
        EdgeMask comp = edge_bit(first);
        VertexMask verts = vertex_mask(g, comp);
        bool grew = true;
        while (grew) {
            grew = false;
            for (int e : mask_to_list(left & ~comp)) {
                const auto& ed = g.edge(e);
                if ((verts >> ed.src & 1u) || (verts >> ed.dst & 1u)) {
                    comp |= edge_bit(e);
                    verts |= (VertexMask(1) << ed.src) | (VertexMask(1) << ed.dst);
                    grew = true;
                }
            }
        }
        comps.push_back(comp);
        left &= ~comp;
    }
    std::sort(comps.begin(), comps.end(), [&](EdgeMask a, EdgeMask b) {
        return std::countr_zero(vertex_mask(g, a)) < std::countr_zero(vertex_mask(g, b));
    });
    return comps;
}

inline bool is_connected(const Diagram& g, const Subgraph& s) {
    return !s.empty() && edge_components(g, s.edges).size() == 1;
}

// Σ deg t(e) + Σ |n(v)| + d(|V|-1) for the subgraph viewed as one block
inline Rational subgraph_degree(const Diagram& g, const LabelTable& labels, const Subgraph& s) {
    if (s.empty()) throw DiagramError("EmptyGraph");
    Rational r(0);
    for (int e : mask_to_list(s.edges)) r += labels.deg(g.edge(e).label, g.edge(e).deriv);
    auto vs = vertices_of(g, s);
    for (int v : vs) r += g.decoration(v).abs();
    r += g.dim() * (static_cast<int>(vs.size()) - 1);
    return r;
}

enum class End { Source, Target };

// internal edge end or a leg; legs only have their vertex end (incoming)
struct HalfEdge {
    bool is_leg = false;
    int index = 0;
    End end = End::Target;
    bool outgoing() const { return end == End::Source; }
    friend bool operator==(const HalfEdge&, const HalfEdge&) = default;
    friend auto operator<=>(const HalfEdge&, const HalfEdge&) = default;
};

inline int half_edge_vertex(const Diagram& g, const HalfEdge& h) {
    if (h.is_leg) return g.leg(h.index).vertex;
    return h.end == End::Source ? g.edge(h.index).src : g.edge(h.index).dst;
}

// half-edges not in s whose vertex lies in s; order: internal edges then legs
inline std::vector<HalfEdge> boundary_half_edges(const Diagram& g, const Subgraph& s) {
    std::vector<HalfEdge> out;
    VertexMask vs = vertex_mask(g, s.edges);
    for (int e = 0; e < g.num_edges(); ++e) {
        if (has_edge(s.edges, e)) continue;
        if (vs >> g.edge(e).src & 1u) out.push_back({false, e, End::Source});
        if (vs >> g.edge(e).dst & 1u) out.push_back({false, e, End::Target});
    }
    for (int l = 0; l < g.num_legs(); ++l)
        if (vs >> g.leg(l).vertex & 1u) out.push_back({true, l, End::Target});
    return out;
}

inline Subgraph closure(const Diagram& g, const Subgraph& s) {
    VertexMask vs = vertex_mask(g, s.edges);
    Subgraph c;
    for (int e = 0; e < g.num_edges(); ++e)
        if ((vs >> g.edge(e).src & 1u) && (vs >> g.edge(e).dst & 1u)) c.edges |= edge_bit(e);
    return c;
}
inline bool is_full(const Diagram& g, const Subgraph& s) { return closure(g, s) == s; }
inline bool is_c_full(const Diagram& g, const Subgraph& s) {
    for (auto c : edge_components(g, s.edges))
        if (!is_full(g, Subgraph{c})) return false;
    return true;
}

inline bool vertex_disjoint(const Diagram& g, const Subgraph& a, const Subgraph& b) {
    return (vertex_mask(g, a.edges) & vertex_mask(g, b.edges)) == 0;
}

}  // namespace bphz

#endif
