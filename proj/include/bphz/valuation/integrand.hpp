#ifndef BPHZ_VALUATION_INTEGRAND_HPP
#define BPHZ_VALUATION_INTEGRAND_HPP

#include "../diagrams/diagram.hpp"
#include "../kernels/kernel.hpp"
#include "quadrature.hpp"
#include "test_function.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace bphz {

// Integration coordinates for the vertices of one diagram. A vertex is either
// pinned at the origin, an absolute anchor, or an offset from its parent.
struct Layout {
    static constexpr int kPinned = -1;
    static constexpr int kAnchor = -2;

    int d = 1;
    std::vector<int> parent;
    std::vector<int> coord;
    std::vector<int> order;
    std::vector<double> lo, hi;
    std::vector<std::vector<double>> breaks;
    std::vector<char> squared;  // coordinate y stands for the offset y|y|

    int num_vertices() const { return static_cast<int>(parent.size()); }
    int num_coords() const { return static_cast<int>(lo.size()); }

    void positions(const double* y, double* x) const {
        for (int v : order) {
            for (int j = 0; j < d; ++j) {
                double base = parent[v] >= 0 ? x[parent[v] * d + j] : 0.0;
                double off = 0.0;
                if (coord[v] >= 0) {
                    double t = y[coord[v] + j];
                    off = is_squared(coord[v] + j) ? t * std::abs(t) : t;
                }
                x[v * d + j] = base + off;
            }
        }
    }

    bool is_squared(int c) const { return c < static_cast<int>(squared.size()) && squared[c]; }

    double jacobian(const double* y) const {
        double J = 1;
        for (int c = 0; c < num_coords(); ++c)
            if (is_squared(c)) J *= 2 * std::abs(y[c]);
        return J;
    }
};

struct AnchorSpec {
    int vertex;
    bool pinned;                             // at the origin
    std::vector<Interval> range;             // per coordinate, when not pinned
    std::vector<std::vector<double>> breaks;  // per coordinate
};

inline std::vector<double> difference_breaks(double reach) {
    std::vector<double> b{0.0, -0.5, 0.5, -1.0, 1.0};
    // dyadic panels on long tails so narrow features of other factors are not stepped over
    for (double x = 2; x < reach; x *= 2) {
        b.push_back(-x);
        b.push_back(x);
    }
    if (reach > 1) {
        b.push_back(-0.5 * reach);
        b.push_back(0.5 * reach);
    }
    return b;
}

// BFS spanning tree from each anchor along the edges of g. Offsets along a
// tree edge are bounded by that edge's kernel reach.
inline Layout tree_layout(const Diagram& g, const KernelAssignment& K, const std::vector<AnchorSpec>& anchors) {
    Layout L;
    L.d = g.dim();
    const int n = g.num_vertices();
    L.parent.assign(n, -3);
    L.coord.assign(n, -1);
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        if (ed.src == ed.dst) continue;
        adj[ed.src].push_back({ed.dst, ed.label});
        adj[ed.dst].push_back({ed.src, ed.label});
    }
    auto push_coords = [&](int v, const std::vector<Interval>& rng, const std::vector<std::vector<double>>& br) {
        L.coord[v] = L.num_coords();
        for (int j = 0; j < L.d; ++j) {
            L.lo.push_back(rng[j].lo);
            L.hi.push_back(rng[j].hi);
            L.breaks.push_back(j < static_cast<int>(br.size()) ? br[j] : std::vector<double>{});
        }
    };
    for (const auto& a : anchors) {
        if (L.parent[a.vertex] != -3) continue;
        L.parent[a.vertex] = a.pinned ? Layout::kPinned : Layout::kAnchor;
        if (!a.pinned) push_coords(a.vertex, a.range, a.breaks);
        std::queue<int> q;
        q.push(a.vertex);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            L.order.push_back(u);
            for (auto [w, label] : adj[u]) {
                if (L.parent[w] != -3) continue;
                L.parent[w] = u;
                double r = K.reach(label);
                push_coords(w, std::vector<Interval>(L.d, Interval{-r, r}),
                            std::vector<std::vector<double>>(L.d, difference_breaks(r)));
                q.push(w);
            }
        }
    }
    for (int v = 0; v < n; ++v)
        if (L.parent[v] == -3) throw std::logic_error("vertex not reachable from any anchor");
    return L;
}

// Every non-anchor vertex offset directly from the anchor of its component,
// within `span` per coordinate. Used when several integrands with different
// edge sets share one set of coordinates. With `squared` the offsets are
// parametrised as y|y|, which tames integrable singularities on the diagonal.
inline Layout star_layout(const Diagram& g, const std::vector<AnchorSpec>& anchors, double span, bool squared = false) {
    Layout L;
    L.d = g.dim();
    const int n = g.num_vertices();
    L.parent.assign(n, -3);
    L.coord.assign(n, -1);
    auto comp = g.components();
    for (const auto& a : anchors) {
        if (L.parent[a.vertex] != -3) continue;
        L.parent[a.vertex] = a.pinned ? Layout::kPinned : Layout::kAnchor;
        if (!a.pinned) {
            L.coord[a.vertex] = L.num_coords();
            for (int j = 0; j < L.d; ++j) {
                L.lo.push_back(a.range[j].lo);
                L.hi.push_back(a.range[j].hi);
                L.breaks.push_back(j < static_cast<int>(a.breaks.size()) ? a.breaks[j] : std::vector<double>{});
            }
        }
        L.order.push_back(a.vertex);
        for (int v = 0; v < n; ++v) {
            if (v == a.vertex || comp[v] != comp[a.vertex] || L.parent[v] != -3) continue;
            L.parent[v] = a.vertex;
            L.coord[v] = L.num_coords();
            for (int j = 0; j < L.d; ++j) {
                double s = squared ? std::sqrt(span) : span;
                L.squared.resize(L.num_coords(), 0);
                L.squared.push_back(squared);
                L.lo.push_back(-s);
                L.hi.push_back(s);
                L.breaks.push_back(squared ? std::vector<double>{0.0, -std::sqrt(0.5), std::sqrt(0.5), -1.0, 1.0}
                                           : difference_breaks(1.0));
            }
            L.order.push_back(v);
        }
    }
    for (int v = 0; v < n; ++v)
        if (L.parent[v] == -3) throw std::logic_error("vertex not reachable from any anchor");
    return L;
}

struct KernelFactor {
    int label;
    MultiIndex deriv;
    int src, dst;
};
struct WeightFactor {
    int vertex, root;
    MultiIndex power;
};
struct LegFactor {
    int vertex;
    MultiIndex deriv;
};

// coef · Π K(x_dst - x_src) · Π (x_w - x_root)^n · (D^ℓ φ)(x_legs)
struct IntegrandTerm {
    double coef = 1;
    std::vector<KernelFactor> kernels;
    std::vector<WeightFactor> weights;
    std::vector<LegFactor> legs;
};

class Integrand {
public:
    Integrand(Layout layout, std::vector<IntegrandTerm> terms, const KernelAssignment& K, TestFunctionPtr phi)
        : L_(std::move(layout)), terms_(std::move(terms)), K_(K), phi_(std::move(phi)) {}

    const Layout& layout() const { return L_; }

    double operator()(const double* y) const {
        const int d = L_.d;
        thread_local std::vector<double> x, diff, args;
        thread_local std::vector<MultiIndex> derivs;
        x.resize(L_.num_vertices() * d);
        diff.resize(d);
        L_.positions(y, x.data());
        double total = 0;
        for (const auto& t : terms_) {
            double v = t.coef;
            for (const auto& k : t.kernels) {
                bool at_zero = true;
                for (int j = 0; j < d; ++j) {
                    diff[j] = x[k.dst * d + j] - x[k.src * d + j];
                    at_zero = at_zero && diff[j] == 0;
                }
                // a node exactly on a coincidence set of an unmollified kernel has measure zero
                if (at_zero && K_.spec(k.label).epsilon == 0) {
                    v = 0;
                    break;
                }
                v *= K_(k.label, k.deriv, diff.data());
                if (v == 0) break;
            }
            if (v == 0) continue;
            for (const auto& w : t.weights)
                for (int j = 0; j < d; ++j) v *= std::pow(x[w.vertex * d + j] - x[w.root * d + j], w.power[j]);
            if (v == 0) continue;
            if (!t.legs.empty()) {
                args.resize(t.legs.size() * d);
                derivs.assign(t.legs.size(), MultiIndex(d));
                for (std::size_t i = 0; i < t.legs.size(); ++i) {
                    for (int j = 0; j < d; ++j) args[i * d + j] = x[t.legs[i].vertex * d + j];
                    derivs[i] = t.legs[i].deriv;
                }
                v *= (*phi_)(derivs, args.data());
            }
            total += v;
        }
        return L_.squared.empty() ? total : total * L_.jacobian(y);
    }

    QuadratureResult integrate(const QuadratureSpec& q) const {
        AdaptiveCubature cub(q);
        return cub.integrate([this](const double* y) { return (*this)(y); }, L_.lo, L_.hi, L_.breaks);
    }

private:
    Layout L_;
    std::vector<IntegrandTerm> terms_;
    const KernelAssignment& K_;
    TestFunctionPtr phi_;
};

// Kernel factors of g with spanning-tree edges first.
inline std::vector<KernelFactor> kernel_factors(const Diagram& g, const Layout& L) {
    std::vector<KernelFactor> tree, rest;
    std::vector<bool> used(g.num_vertices(), false);
    for (const auto& e : g.edges()) {
        bool is_tree = (L.parent[e.dst] == e.src && !used[e.dst]) || (L.parent[e.src] == e.dst && !used[e.src]);
        if (is_tree) {
            int child = L.parent[e.dst] == e.src ? e.dst : e.src;
            used[child] = true;
            tree.push_back({e.label, e.deriv, e.src, e.dst});
        } else {
            rest.push_back({e.label, e.deriv, e.src, e.dst});
        }
    }
    tree.insert(tree.end(), rest.begin(), rest.end());
    return tree;
}

}  // namespace bphz

#endif
