#ifndef BPHZ_MULTISCALE_HEPP_HPP
#define BPHZ_MULTISCALE_HEPP_HPP

#include "../algebra/forest.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace bphz {

class MultiscaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;

inline double euclidean(const Point& a, const Point& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Binary merge tree: nodes 0..n-1 are the leaves (vertices), the others are
// inner nodes in merge order, the last one being the root.
struct HeppTree {
    int leaves = 0;
    std::vector<int> parent;           // -1 at the root
    std::vector<std::pair<int, int>> children;  // inner nodes only, indexed by node - leaves
    std::vector<int> scale;            // inner nodes only
    std::vector<double> merge_distance;

    int root() const { return static_cast<int>(parent.size()) - 1; }
    int node_scale(int u) const { return scale.at(u - leaves); }

    int depth(int u) const {
        int d = 0;
        while (parent[u] >= 0) u = parent[u], ++d;
        return d;
    }
    int lca(int u, int v) const {
        int du = depth(u), dv = depth(v);
        while (du > dv) u = parent[u], --du;
        while (dv > du) v = parent[v], --dv;
        while (u != v) u = parent[u], v = parent[v];
        return u;
    }
    // 𝐧 at v ∧ v̄; a leaf with itself sits infinitely deep
    int scale_of(int v, int w) const { return v == w ? INT_MAX : node_scale(lca(v, w)); }
    double distance(int v, int w) const { return v == w ? 0.0 : std::exp2(-scale_of(v, w)); }
};

// single-linkage merge tree of the minimal spanning tree
inline HeppTree hepp_tree(const std::vector<Point>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 2) throw MultiscaleError("TooFewPoints");
    std::vector<std::tuple<double, int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (points[i].size() != points[j].size()) throw MultiscaleError("DimensionMismatch");
            double d = euclidean(points[i], points[j]);
            if (d == 0) throw MultiscaleError("DuplicatePoints");
            pairs.emplace_back(d, i, j);
        }
    std::sort(pairs.begin(), pairs.end());

    HeppTree t;
    t.leaves = n;
    t.parent.assign(n, -1);
    std::vector<int> uf(n), top(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::iota(top.begin(), top.end(), 0);
    auto find = [&](int x) {
        while (uf[x] != x) x = uf[x] = uf[uf[x]];
        return x;
    };
    for (const auto& [d, i, j] : pairs) {
        int a = find(i), b = find(j);
        if (a == b) continue;
        int node = static_cast<int>(t.parent.size());
        t.parent.push_back(-1);
        t.parent[top[a]] = node;
        t.parent[top[b]] = node;
        t.children.emplace_back(top[a], top[b]);
        t.scale.push_back(static_cast<int>(std::ceil(-std::log2(d))));
        t.merge_distance.push_back(d);
        uf[b] = a;
        top[a] = node;
    }
    return t;
}

// exhaustive check of d(u,w) <= max(d(u,v), d(v,w))
inline bool is_ultrametric(const HeppTree& t) {
    for (int u = 0; u < t.leaves; ++u)
        for (int v = 0; v < t.leaves; ++v)
            for (int w = 0; w < t.leaves; ++w)
                if (t.distance(u, w) > std::max(t.distance(u, v), t.distance(v, w))) return false;
    return true;
}

inline double distance_constant(int n) { return 2.0 * (n - 1); }

// C⁻¹ 2^{-𝐧} <= |x_v - x_w| <= C 2^{-𝐧} for every pair
inline bool distance_bounds_hold(const HeppTree& t, const std::vector<Point>& points) {
    const double C = distance_constant(t.leaves);
    for (int v = 0; v < t.leaves; ++v)
        for (int w = v + 1; w < t.leaves; ++w) {
            double d = euclidean(points[v], points[w]), s = t.distance(v, w);
            if (d < s / C || d > C * s) return false;
        }
    return true;
}

struct GammaScales {
    Subgraph gamma;
    int internal = 0;  // int(γ)
    int external = 0;  // ext(γ), INT_MIN when γ has no adjacent edge in its parent
    bool safe = false;
};

struct ForestScales {
    std::vector<GammaScales> entries;  // in forest order
    std::vector<int> edge_scale;       // scale of every edge of Γ under the remapping
    bool safe() const {
        return std::all_of(entries.begin(), entries.end(), [](const GammaScales& e) { return e.safe; });
    }
    const GammaScales& at(const Subgraph& s) const {
        for (const auto& e : entries)
            if (e.gamma == s) return e;
        throw MultiscaleError("NotInForest");
    }
};

inline ForestScales forest_scales(const Diagram& g, const Forest& f, const HeppTree& t) {
    if (t.leaves != g.num_vertices()) throw MultiscaleError("TreeDoesNotMatchDiagram");
    for (const auto& s : f.elements)
        if (s.empty() || !is_full(g, s)) throw MultiscaleError("NotFullForest");
    if (!is_forest(g, f.elements)) throw MultiscaleError("NotFullForest");

    const int m = f.size();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return f.elements[a].size() < f.elements[b].size(); });
    std::vector<VertexMask> verts(m);
    for (int i = 0; i < m; ++i) verts[i] = vertex_mask(g, f.elements[i].edges);
    // innermost element strictly containing each element, -1 for Γ
    std::vector<int> parent(m, -1);
    for (int i = 0; i < m; ++i)
        for (int j : order)
            if (j != i && f.elements[j].contains(f.elements[i])) {
                parent[i] = j;
                break;
            }
    auto owner = [&](int e) {
        for (int j : order)
            if (has_edge(f.elements[j].edges, e)) return j;
        return -1;
    };
    std::vector<int> vstar(m, -1);
    // an endpoint inside a child of the edge's owner is moved to that child's v⋆
    auto remap = [&](int v, int own) {
        for (int c = 0; c < m; ++c)
            if (parent[c] == own && (verts[c] >> v & 1u)) return vstar[c];
        return v;
    };
    std::vector<int> own(g.num_edges());
    for (int e = 0; e < g.num_edges(); ++e) own[e] = owner(e);
    for (int i : order) {
        int best = -1;
        for (int e : mask_to_list(f.elements[i].edges))
            if (own[e] == i) best = std::max({best, remap(g.edge(e).src, i), remap(g.edge(e).dst, i)});
        vstar[i] = best;
    }

    ForestScales out;
    out.edge_scale.resize(g.num_edges());
    for (int e = 0; e < g.num_edges(); ++e)
        out.edge_scale[e] = t.scale_of(remap(g.edge(e).src, own[e]), remap(g.edge(e).dst, own[e]));
    for (int i = 0; i < m; ++i) {
        GammaScales s{f.elements[i], INT_MAX, INT_MIN, false};
        for (int e = 0; e < g.num_edges(); ++e) {
            const auto& ed = g.edge(e);
            if (own[e] == i) s.internal = std::min(s.internal, out.edge_scale[e]);
            bool adjacent = !has_edge(f.elements[i].edges, e) && ((verts[i] >> ed.src & 1u) || (verts[i] >> ed.dst & 1u));
            bool in_parent = parent[i] < 0 || has_edge(f.elements[parent[i]].edges, e);
            if (adjacent && in_parent) s.external = std::max(s.external, out.edge_scale[e]);
        }
        s.safe = s.external >= s.internal;
        out.entries.push_back(s);
    }
    return out;
}

// ℱ_u: full divergent γ ∉ ℱ_s such that ℱ_s ∪ {γ} is a forest in which γ is unsafe
inline Forest safe_decomposition(const Diagram& g, const LabelTable& labels, const Forest& fs, const HeppTree& t) {
    if (!forest_scales(g, fs, t).safe()) throw MultiscaleError("NotSafe");
    std::vector<Subgraph> unsafe;
    for (const auto& c : divergent_list(g, labels, true)) {
        if (fs.contains(c)) continue;
        auto els = fs.elements;
        els.push_back(c);
        if (!is_forest(g, els)) continue;
        if (!forest_scales(g, make_forest(els), t).at(c).safe) unsafe.push_back(c);
    }
    return make_forest(std::move(unsafe));
}

// {[ℱ_s, ℱ_s ∪ ℱ_u]} over the safe full forests, checked to partition them all
inline std::vector<ForestInterval> interval_partition(const Diagram& g, const LabelTable& labels, const HeppTree& t) {
    auto family = forests(g, labels, true);
    std::vector<ForestInterval> out;
    for (const auto& f : family)
        if (forest_scales(g, f, t).safe()) out.push_back({f, safe_decomposition(g, labels, f, t)});
    if (!is_interval_partition(family, out)) throw MultiscaleError("NotAPartition");
    return out;
}

}  // namespace bphz

#endif
