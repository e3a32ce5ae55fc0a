#ifndef BPHZ_DIAGRAMS_CANONICAL_HPP
#define BPHZ_DIAGRAMS_CANONICAL_HPP

#include "diagram.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

namespace bphz {

using CanonicalCode = std::vector<std::int64_t>;

struct CanonicalForm {
    CanonicalCode code;
    Diagram diagram;  // relabelled representative
};

namespace detail {

inline void push_multi(std::vector<std::int64_t>& out, const MultiIndex& m) {
    for (int i = 0; i < m.dim(); ++i) out.push_back(m[i]);
}

// rank vertices by signature; returns number of distinct classes
inline int rank_signatures(const std::vector<std::vector<std::int64_t>>& sig, std::vector<int>& color) {
    std::vector<int> order(sig.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return sig[a] < sig[b]; });
    int c = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || sig[order[i]] != sig[order[i - 1]]) ++c;
        color[order[i]] = c;
    }
    return c + 1;
}

class ComponentCanonizer {
public:
    ComponentCanonizer(const Diagram& g, std::vector<int> verts, bool ignore_root = false)
        : g_(g), verts_(std::move(verts)), ignore_root_(ignore_root) {
        n_ = static_cast<int>(verts_.size());
        local_.assign(g.num_vertices(), -1);
        for (int i = 0; i < n_; ++i) local_[verts_[i]] = i;
        for (int e = 0; e < g.num_edges(); ++e)
            if (local_[g.edge(e).src] >= 0) edges_.push_back(e);
        for (int l = 0; l < g.num_legs(); ++l)
            if (local_[g.leg(l).vertex] >= 0) legs_.push_back(l);
    }

    // best code and the vertex order achieving it (position -> local vertex)
    std::pair<CanonicalCode, std::vector<int>> run() {
        std::vector<std::vector<std::int64_t>> sig(n_);
        for (int i = 0; i < n_; ++i) {
            int v = verts_[i];
            sig[i].push_back(root_flag(v));
            push_multi(sig[i], g_.decoration(v));
            for (std::size_t k = 0; k < legs_.size(); ++k) {
                const auto& l = g_.leg(legs_[k]);
                if (l.vertex != v) continue;
                sig[i].push_back(static_cast<std::int64_t>(k));
                push_multi(sig[i], l.deriv);
            }
        }
        std::vector<int> color(n_);
        rank_signatures(sig, color);
        search(color);
        return {best_, best_order_};
    }

private:
    int refine(std::vector<int>& color) const {
        int classes = 0;
        for (int round = 0; round <= n_; ++round) {
            std::vector<std::vector<std::int64_t>> sig(n_);
            for (int i = 0; i < n_; ++i) sig[i].push_back(color[i]);
            std::vector<std::vector<std::vector<std::int64_t>>> nb(n_);
            for (int e : edges_) {
                const auto& ed = g_.edge(e);
                int a = local_[ed.src], b = local_[ed.dst];
                std::vector<std::int64_t> t{0, ed.label};
                push_multi(t, ed.deriv);
                if (a == b) {
                    t[0] = 2;
                    t.push_back(color[a]);
                    nb[a].push_back(t);
                    continue;
                }
                auto out = t;
                out.push_back(color[b]);
                nb[a].push_back(out);
                t[0] = 1;
                t.push_back(color[a]);
                nb[b].push_back(t);
            }
            for (int i = 0; i < n_; ++i) {
                std::sort(nb[i].begin(), nb[i].end());
                for (const auto& t : nb[i]) {
                    sig[i].push_back(-1);
                    sig[i].insert(sig[i].end(), t.begin(), t.end());
                }
            }
            int next = rank_signatures(sig, color);
            if (next == classes) break;
            classes = next;
        }
        return classes;
    }

    void search(std::vector<int> color) {
        int classes = refine(color);
        if (classes == n_) {
            std::vector<int> order(n_);
            for (int i = 0; i < n_; ++i) order[color[i]] = i;
            auto code = encode(color);
            if (!have_ || code < best_) {
                best_ = std::move(code);
                best_order_ = order;
                have_ = true;
            }
            return;
        }
        // first non-singleton cell
        std::vector<int> count(classes, 0);
        for (int c : color) count[c]++;
        int cell = 0;
        while (count[cell] == 1) ++cell;
        for (int v = 0; v < n_; ++v) {
            if (color[v] != cell) continue;
            std::vector<int> c2(n_);
            for (int u = 0; u < n_; ++u) c2[u] = 2 * color[u] + ((color[u] == cell && u != v) ? 1 : 0);
            std::vector<std::vector<std::int64_t>> sig(n_);
            for (int u = 0; u < n_; ++u) sig[u] = {c2[u]};
            rank_signatures(sig, c2);
            search(c2);
        }
    }

    CanonicalCode encode(const std::vector<int>& pos) const {
        CanonicalCode code{n_, static_cast<std::int64_t>(edges_.size()), static_cast<std::int64_t>(legs_.size()),
                           ignore_root_ ? 1 : 0};
        std::vector<int> order(n_);
        for (int i = 0; i < n_; ++i) order[pos[i]] = i;
        for (int p = 0; p < n_; ++p) {
            int v = verts_[order[p]];
            code.push_back(root_flag(v));
            push_multi(code, g_.decoration(v));
        }
        std::vector<std::vector<std::int64_t>> es;
        for (int e : edges_) {
            const auto& ed = g_.edge(e);
            std::vector<std::int64_t> t{pos[local_[ed.src]], pos[local_[ed.dst]], ed.label};
            push_multi(t, ed.deriv);
            es.push_back(std::move(t));
        }
        std::sort(es.begin(), es.end());
        for (auto& t : es) code.insert(code.end(), t.begin(), t.end());
        for (int l : legs_) {
            code.push_back(pos[local_[g_.leg(l).vertex]]);
            push_multi(code, g_.leg(l).deriv);
        }
        return code;
    }

    std::int64_t root_flag(int v) const { return !ignore_root_ && g_.is_root(v) ? 1 : 0; }

    const Diagram& g_;
    std::vector<int> verts_;
    bool ignore_root_ = false;
    std::vector<int> local_;
    std::vector<int> edges_, legs_;
    int n_ = 0;
    bool have_ = false;
    CanonicalCode best_;
    std::vector<int> best_order_;
};

}  // namespace detail

// Canonical representative up to vertex relabelling. Components carrying legs
// keep the order of their first leg; leg-free components are sorted by code.
// A rooted component without legs or decorations does not depend on where its
// root sits (moving it is a relation of the vacuum ideal), so the root is put
// on the first canonical vertex.
inline CanonicalForm canonicalize(const Diagram& g) {
    CanonicalForm out;
    out.diagram = Diagram(g.dim());
    out.code.push_back(g.dim());
    if (g.empty()) return out;
    auto comp = g.components();
    int nc = g.num_components();
    std::vector<std::vector<int>> verts(nc);
    for (int v = 0; v < g.num_vertices(); ++v) verts[comp[v]].push_back(v);
    std::vector<int> first_leg(nc, -1);
    for (int l = g.num_legs() - 1; l >= 0; --l) first_leg[comp[g.leg(l).vertex]] = l;

    struct Piece {
        int comp;
        CanonicalCode code;
        std::vector<int> order;
    };
    std::vector<bool> floating(nc, true);
    for (int v = 0; v < g.num_vertices(); ++v)
        if (!g.decoration(v).is_zero()) floating[comp[v]] = false;
    for (const auto& l : g.legs()) floating[comp[l.vertex]] = false;
    std::vector<bool> rooted(nc, false);
    for (int r : g.roots()) rooted[comp[r]] = true;
    std::vector<Piece> pieces;
    for (int c = 0; c < nc; ++c) {
        floating[c] = floating[c] && rooted[c];
        detail::ComponentCanonizer cz(g, verts[c], floating[c]);
        auto [code, order] = cz.run();
        pieces.push_back({c, std::move(code), std::move(order)});
    }
    std::sort(pieces.begin(), pieces.end(), [&](const Piece& a, const Piece& b) {
        int la = first_leg[a.comp], lb = first_leg[b.comp];
        if ((la >= 0) != (lb >= 0)) return la >= 0;
        if (la >= 0) return la < lb;
        return a.code < b.code;
    });

    std::vector<int> newid(g.num_vertices(), -1);
    int next = 0;
    for (const auto& p : pieces) {
        for (int local : p.order) newid[verts[p.comp][local]] = next++;
        out.code.push_back(-7);
        out.code.insert(out.code.end(), p.code.begin(), p.code.end());
    }
    Diagram& d = out.diagram;
    for (int i = 0; i < g.num_vertices(); ++i) d.add_vertex();
    for (int v = 0; v < g.num_vertices(); ++v) {
        d.set_decoration(newid[v], g.decoration(v));
        if (g.is_root(v) && !floating[comp[v]]) d.add_root(newid[v]);
    }
    for (const auto& p : pieces)
        if (floating[p.comp]) d.add_root(newid[verts[p.comp][p.order.front()]]);
    std::vector<Edge> es;
    for (const auto& e : g.edges()) es.push_back({newid[e.src], newid[e.dst], e.label, e.deriv});
    std::sort(es.begin(), es.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.src, a.dst, a.label, a.deriv) < std::tie(b.src, b.dst, b.label, b.deriv);
    });
    for (const auto& e : es) d.add_edge(e.src, e.dst, e.label, e.deriv);
    for (const auto& l : g.legs()) d.add_leg(newid[l.vertex], l.deriv);
    return out;
}

inline bool isomorphic(const Diagram& a, const Diagram& b) { return canonicalize(a).code == canonicalize(b).code; }

}  // namespace bphz

#endif
