// Brute-force reference implementations used only by the tests.
#ifndef BPHZ_TESTS_ORACLES_HPP
#define BPHZ_TESTS_ORACLES_HPP

#include <bphz/diagrams/diagram.hpp>
#include <bphz/diagrams/labels.hpp>

#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using bphz::Diagram;
using bphz::LabelTable;
using bphz::Rational;

inline std::vector<int> edges_of(std::uint64_t mask, int m) {
    std::vector<int> out;
    for (int e = 0; e < m; ++e)
        if (mask >> e & 1u) out.push_back(e);
    return out;
}

inline std::set<int> vertex_set(const Diagram& g, std::uint64_t mask) {
    std::set<int> vs;
    for (int e : edges_of(mask, g.num_edges())) {
        vs.insert(g.edge(e).src);
        vs.insert(g.edge(e).dst);
    }
    return vs;
}

// connectivity by repeated relaxation over a union-find on vertices
inline bool connected(const Diagram& g, std::uint64_t mask) {
    if (mask == 0) return false;
    std::vector<int> p(g.num_vertices());
    std::iota(p.begin(), p.end(), 0);
    auto find = [&](int x) {
        while (p[x] != x) x = p[x];
        return x;
    };
    for (int e : edges_of(mask, g.num_edges())) p[find(g.edge(e).src)] = find(g.edge(e).dst);
    auto vs = vertex_set(g, mask);
    int root = find(*vs.begin());
    for (int v : vs)
        if (find(v) != root) return false;
    return true;
}

inline Rational degree(const Diagram& g, const LabelTable& labels, std::uint64_t mask) {
    Rational r(0);
    for (int e : edges_of(mask, g.num_edges())) r += labels[g.edge(e).label].deg - g.edge(e).deriv.abs();
    auto vs = vertex_set(g, mask);
    for (int v : vs) r += g.decoration(v).abs();
    r += Rational(labels.dimension() * (static_cast<int>(vs.size()) - 1));
    return r;
}

inline bool full(const Diagram& g, std::uint64_t mask) {
    auto vs = vertex_set(g, mask);
    for (int e = 0; e < g.num_edges(); ++e)
        if (vs.count(g.edge(e).src) && vs.count(g.edge(e).dst) && !(mask >> e & 1u)) return false;
    return true;
}

// every nonempty edge subset, filtered
inline std::vector<std::uint64_t> divergent(const Diagram& g, const LabelTable& labels, bool full_only = false) {
    std::vector<std::uint64_t> out;
    const std::uint64_t n = std::uint64_t(1) << g.num_edges();
    for (std::uint64_t m = 1; m < n; ++m)
        if (connected(g, m) && degree(g, labels, m) <= 0 && (!full_only || full(g, m))) out.push_back(m);
    return out;
}

inline bool compatible(const Diagram& g, std::uint64_t a, std::uint64_t b) {
    if ((a & b) == a || (a & b) == b) return true;
    auto va = vertex_set(g, a), vb = vertex_set(g, b);
    for (int v : va)
        if (vb.count(v)) return false;
    return true;
}

// every subset of the divergent family whose members are pairwise nested or
// vertex-disjoint; each forest as a sorted set of masks
inline std::set<std::set<std::uint64_t>> forests(const Diagram& g, const LabelTable& labels, bool full_only = false) {
    auto div = divergent(g, labels, full_only);
    std::set<std::set<std::uint64_t>> out;
    const std::uint64_t n = std::uint64_t(1) << div.size();
    for (std::uint64_t s = 0; s < n; ++s) {
        std::vector<std::uint64_t> els;
        for (std::size_t i = 0; i < div.size(); ++i)
            if (s >> i & 1u) els.push_back(div[i]);
        bool ok = true;
        for (std::size_t i = 0; i < els.size() && ok; ++i)
            for (std::size_t j = i + 1; j < els.size() && ok; ++j) ok = compatible(g, els[i], els[j]);
        if (ok) out.insert(std::set<std::uint64_t>(els.begin(), els.end()));
    }
    return out;
}

}  // namespace oracle

#endif
