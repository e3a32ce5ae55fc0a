#ifndef BPHZ_ALGEBRA_ANTIPODE_HPP
#define BPHZ_ALGEBRA_ANTIPODE_HPP

#include "coaction.hpp"
#include "formal_sum.hpp"

#include <map>
#include <memory>
#include <vector>

namespace bphz {

// connected components as separate diagrams, in vertex order
inline std::vector<Diagram> split_components(const Diagram& g) {
    std::vector<Diagram> out;
    if (g.empty()) return out;
    auto comp = g.components();
    int nc = g.num_components();
    std::vector<std::vector<int>> verts(nc);
    for (int v = 0; v < g.num_vertices(); ++v) verts[comp[v]].push_back(v);
    for (int c = 0; c < nc; ++c) {
        Diagram h(g.dim());
        std::vector<int> id(g.num_vertices(), -1);
        for (int v : verts[c]) {
            id[v] = h.add_vertex();
            h.set_decoration(id[v], g.decoration(v));
            if (g.is_root(v)) h.add_root(id[v]);
        }
        for (const auto& e : g.edges())
            if (comp[e.src] == c) h.add_edge(id[e.src], id[e.dst], e.label, e.deriv);
        for (const auto& l : g.legs())
            if (comp[l.vertex] == c) h.add_leg(id[l.vertex], l.deriv);
        out.push_back(std::move(h));
    }
    return out;
}

// Memoised twisted antipode Â and antipode 𝒜 for one label table.
class AntipodeEngine {
public:
    explicit AntipodeEngine(const LabelTable& labels) : labels_(labels) {}

    const LabelTable& labels() const { return labels_; }

    // Â on a connected vacuum diagram of degree <= 0
    const FormalSum& twisted(const Diagram& tau) { return compute(tau, true); }
    // 𝒜 on a connected vacuum diagram of degree <= 0 (right factors projected)
    const FormalSum& plain(const Diagram& tau) { return compute(tau, false); }

    // multiplicative extension; 1 maps to 1
    FormalSum twisted_product(const Diagram& g) { return product(g, true); }
    FormalSum plain_product(const Diagram& g) { return product(g, false); }

private:
    FormalSum product(const Diagram& g, bool twisted_mode) {
        FormalSum acc = FormalSum::unit(g.dim());
        for (const auto& c : split_components(g)) acc = acc * compute(c, twisted_mode);
        return acc;
    }

    const FormalSum& compute(const Diagram& tau, bool twisted_mode) {
        auto cf = canonicalize(tau);
        auto& memo = twisted_mode ? twisted_memo_ : plain_memo_;
        if (auto it = memo.find(cf.code); it != memo.end()) return it->second;
        if (!tau.vacuum_mode() || tau.num_components() != 1) throw DiagramError("NotVacuum");
        if (degree(tau, labels_) > 0) throw DiagramError("PositiveDegree");
        FormalSum res = FormalSum::single(cf.diagram, Rational(-1));
        for (const auto& [k, t] : reduced_coproduct(cf.diagram, labels_, !twisted_mode)) {
            FormalSum left = product(t.left, twisted_mode);
            res -= (left * FormalSum::single(t.right)) * t.coef;
        }
        return memo.emplace(cf.code, std::move(res)).first->second;
    }

    const LabelTable& labels_;
    std::map<CanonicalCode, FormalSum> twisted_memo_, plain_memo_;
};

inline FormalSum twisted_antipode(const Diagram& tau, const LabelTable& labels) {
    AntipodeEngine e(labels);
    return e.twisted_product(tau);
}
inline FormalSum antipode(const Diagram& tau, const LabelTable& labels) {
    AntipodeEngine e(labels);
    return e.plain_product(tau);
}

// ℳ(Â⊗id)Δ⁻τ, which must vanish identically
inline FormalSum twisted_identity_residual(const Diagram& tau, const LabelTable& labels) {
    AntipodeEngine e(labels);
    FormalSum out;
    for (const auto& [k, t] : coproduct_minus(tau, labels))
        out += (e.twisted_product(t.left) * FormalSum::single(t.right)) * t.coef;
    return out;
}

}  // namespace bphz

#endif
