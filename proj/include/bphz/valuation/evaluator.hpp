#ifndef BPHZ_VALUATION_EVALUATOR_HPP
#define BPHZ_VALUATION_EVALUATOR_HPP

#include "../algebra/antipode.hpp"
#include "../algebra/character.hpp"
#include "../algebra/coaction.hpp"
#include "../algebra/forest.hpp"
#include "../diagrams/canonical.hpp"
#include "../diagrams/partitions.hpp"
#include "../kernels/kernel.hpp"
#include "estimate.hpp"
#include "integrand.hpp"
#include "quadrature.hpp"
#include "test_function.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace bphz {

struct ValuationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Route { TwistedAntipode, ForestFormula, FullForest };

inline const char* route_name(Route r) {
    switch (r) {
        case Route::TwistedAntipode: return "twisted-antipode";
        case Route::ForestFormula: return "forest-formula";
        case Route::FullForest: return "full-forest";
    }
    return "?";
}

struct TermContribution {
    std::string id;
    double value;
    double error;
};

struct EvaluationReport {
    double value = 0;
    double error_estimate = 0;
    std::vector<TermContribution> terms;
    double wall_ms = 0;
    long evaluations = 0;

    Estimate estimate() const { return Estimate(value, error_estimate); }
};

inline bool weinberg_holds(const Diagram& g, const LabelTable& labels) {
    return connected_divergent_subgraphs(g, labels).empty();
}

// Canonical valuation Π^K, vacuum constants Π₋^K and the renormalised
// valuations built from them. Vacuum constants always use the small-scale
// kernels only.
class Evaluator {
public:
    Evaluator(const LabelTable& labels, KernelAssignment K, QuadratureSpec q = {})
        : labels_(labels), K_(std::move(K)), Ksmall_(K_.small_scale_only()), q_(q), engine_(labels_) {
        if (!std::isfinite(K_.max_reach())) throw ValuationError("large-scale kernels need a finite truncation radius");
    }

    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    const LabelTable& labels() const { return labels_; }
    const KernelAssignment& kernels() const { return K_; }
    const QuadratureSpec& quadrature() const { return q_; }
    long evaluations() const { return evaluations_; }

    // ∫ D^k φ for a one-argument test function
    Estimate test_integral(const TestFunction& phi, const MultiIndex& k) {
        if (!k.is_zero()) return Estimate(0.0);
        const int d = phi.dim();
        std::vector<double> lo(d), hi(d);
        std::vector<std::vector<double>> br(d);
        for (int j = 0; j < d; ++j) {
            auto s = phi.support(0, j, 0.0);
            if (!s.finite()) throw ValuationError("test function without compact support");
            lo[j] = s.lo;
            hi[j] = s.hi;
            br[j] = phi.breakpoints(0, j);
        }
        AdaptiveCubature cub(q_);
        std::vector<MultiIndex> ks{k};
        auto r = cub.integrate([&](const double* y) { return phi(ks, y); }, lo, hi, br);
        return finish(r);
    }

    // Π^K Γ (φ)
    Estimate canonical(const Diagram& g, const TestFunctionPtr& phi) {
        if (g.empty()) return Estimate(1.0);
        if (g.vacuum_mode()) throw ValuationError("canonical valuation needs legs");
        if (!phi || phi->arity() != g.num_legs()) throw ValuationError("test function arity mismatch");
        check_singular(g);
        auto cf = canonicalize(g);
        auto key = std::make_pair(cf.code, phi.get());
        if (auto it = canonical_cache_.find(key); it != canonical_cache_.end()) return it->second;
        Estimate v = canonical_uncached(cf.diagram, phi);
        canonical_cache_.emplace(key, v);
        keepalive_.push_back(phi);
        return v;
    }

    // Π₋^K on one connected vacuum diagram
    Estimate vacuum_connected(const Diagram& v) {
        if (v.empty()) return Estimate(1.0);
        if (!v.vacuum_mode() || v.num_components() != 1) throw ValuationError("NotVacuum");
        auto cf = canonicalize(v);
        if (auto it = vacuum_cache_.find(cf.code); it != vacuum_cache_.end()) return it->second;
        Estimate val = vacuum_uncached(cf.diagram);
        vacuum_cache_.emplace(cf.code, val);
        return val;
    }

    Estimate vacuum(const Diagram& v) {
        Estimate acc(1.0);
        for (const auto& c : split_components(v)) acc *= vacuum_connected(c);
        return acc;
    }

    Character<Estimate> pi_minus() {
        return Character<Estimate>([this](const Diagram& t) { return vacuum_connected(t); });
    }

    // Π₋^K Â
    Character<Estimate> bphz_character() {
        if (!bphz_char_) {
            auto pm = pi_minus();
            bphz_char_ = Character<Estimate>([this, pm](const Diagram& t) { return pm(engine_.twisted(t)); });
        }
        return *bphz_char_;
    }

    // Σ c · Π₋(left) · Π(right)(φ)
    EvaluationReport pair(const TensorSum& s, const TestFunctionPtr& phi) {
        auto pm = pi_minus();
        return pair_with(s, phi, [&](const Diagram& left) { return pm(left); });
    }

    // (g ⊗ Π^K) Δ Γ (φ)
    EvaluationReport with_character(const Character<Estimate>& g, const Diagram& gamma, const TestFunctionPtr& phi) {
        return pair_with(coaction(gamma, labels_), phi, [&](const Diagram& left) { return g(left); });
    }

    EvaluationReport bphz(const Diagram& gamma, const TestFunctionPtr& phi, Route route = Route::TwistedAntipode) {
        if (gamma.empty()) {
            EvaluationReport r;
            r.value = 1;
            return r;
        }
        switch (route) {
            case Route::TwistedAntipode: return with_character(bphz_character(), gamma, phi);
            case Route::ForestFormula: return pair(forest_formula(gamma, labels_, false), phi);
            case Route::FullForest: return pair(forest_formula(gamma, labels_, true), phi);
        }
        throw std::logic_error("route");
    }

    // Forest formula as one integrand over the vertices of Γ. Each forest term
    // is placed on the original vertex positions (vacuum roots sit on the
    // quotient vertex they were collapsed onto), so the Taylor subtractions
    // cancel inside the integrand. Works at ε = 0 where the separate terms diverge.
    EvaluationReport merged_forest(const Diagram& gamma, const TestFunctionPtr& phi, bool full_only = false) {
        auto t0 = std::chrono::steady_clock::now();
        if (!phi || phi->arity() != gamma.num_legs()) throw ValuationError("test function arity mismatch");
        const int n = gamma.num_vertices();
        const bool single = gamma.num_legs() == 1 && gamma.num_components() == 1;
        Estimate J(1.0);
        if (single) J = test_integral(*phi, MultiIndex(gamma.dim()));

        std::vector<IntegrandTerm> terms;
        for (const auto& w : forest_formula_tracked(gamma, labels_, full_only)) {
            auto term = merged_term(w, n);
            if (!term) continue;
            if (single) {
                if (!term->legs.at(0).deriv.is_zero()) continue;
                term->legs.clear();
            }
            terms.push_back(std::move(*term));
        }
        auto anchors = anchor_specs(gamma, *phi, single);
        double span = std::max(1, n - 1) * K_.max_reach();
        bool singular = false;
        for (const auto& e : gamma.edges()) singular = singular || K_.spec(e.label).epsilon == 0;
        Layout L = star_layout(gamma, anchors, span, singular);
        Integrand f(std::move(L), std::move(terms), K_, phi);
        Estimate v = finish(f.integrate(q_));
        if (single) v *= J;
        EvaluationReport rep;
        rep.value = v.value;
        rep.error_estimate = v.error;
        rep.terms.push_back({"merged", v.value, v.error});
        rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rep.evaluations = evaluations_;
        return rep;
    }

    // Π^{K,R}_bphz, refusing diagrams outside ℋ₊
    EvaluationReport large_scale(const Diagram& gamma, const TestFunctionPtr& phi, bool renormalised = true) {
        if (renormalised && !in_H_plus(gamma, labels_)) throw ValuationError("NotInHPlus");
        if (renormalised) return bphz(gamma, phi, Route::TwistedAntipode);
        EvaluationReport r;
        auto e = canonical(gamma, phi);
        r.value = e.value;
        r.error_estimate = e.error;
        return r;
    }

private:
    template <class LeftFn>
    EvaluationReport pair_with(const TensorSum& s, const TestFunctionPtr& phi, LeftFn&& left) {
        auto t0 = std::chrono::steady_clock::now();
        EvaluationReport rep;
        CompensatedSum total;
        double err = 0;
        int i = 0;
        for (const auto& [key, t] : s) {
            Estimate c(to_double(t.coef));
            Estimate l = left(t.left);
            Estimate v = c * l;
            if (l.value != 0 || l.error != 0) v *= canonical(t.right, phi);
            total.add(v.value);
            err += v.error;
            rep.terms.push_back({"term" + std::to_string(i++), v.value, v.error});
        }
        rep.value = total.value();
        rep.error_estimate = err;
        rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rep.evaluations = evaluations_;
        return rep;
    }

    void check_singular(const Diagram& g) const {
        bool singular = false;
        for (const auto& e : g.edges())
            if (K_.spec(e.label).epsilon == 0) singular = true;
        if (singular && !weinberg_holds(g, labels_)) throw ValuationError("SingularKernel");
    }

    Estimate finish(const QuadratureResult& r) {
        evaluations_ += r.evaluations;
        if (!r.converged) throw QuadratureFailure(r);
        return Estimate(r.value, r.error);
    }

    std::vector<AnchorSpec> anchor_specs(const Diagram& g, const TestFunction& phi, bool pinned_single) const {
        std::vector<AnchorSpec> out;
        auto comp = g.components();
        std::vector<int> size(g.num_components(), 0);
        for (int v = 0; v < g.num_vertices(); ++v) ++size[comp[v]];
        std::vector<bool> done(g.num_components(), false);
        const int d = g.dim();
        if (pinned_single) {
            out.push_back({g.leg(0).vertex, true, {}, {}});
            return out;
        }
        for (int i = 0; i < g.num_legs(); ++i) {
            int v = g.leg(i).vertex;
            int c = comp[v];
            if (done[c]) continue;
            double spread = (size[c] - 1) * K_.max_reach();
            AnchorSpec a{v, false, {}, {}};
            bool finite = true;
            for (int j = 0; j < d; ++j) {
                auto s = phi.support(i, j, spread);
                finite = finite && s.finite();
                a.range.push_back(s);
                a.breaks.push_back(phi.breakpoints(i, j));
            }
            if (!finite) continue;
            done[c] = true;
            out.push_back(std::move(a));
        }
        for (int c = 0; c < g.num_components(); ++c)
            if (!done[c]) throw ValuationError("no compactly supported leg to anchor a component");
        return out;
    }

    Estimate canonical_uncached(const Diagram& g, const TestFunctionPtr& phi) {
        const bool single = g.num_legs() == 1 && g.num_components() == 1;
        Estimate J(1.0);
        if (single) {
            J = test_integral(*phi, g.leg(0).deriv);
            if (J.value == 0 && J.error == 0) return J;
        }
        auto anchors = anchor_specs(g, *phi, single);
        Layout L = tree_layout(g, K_, anchors);
        IntegrandTerm t;
        t.kernels = kernel_factors(g, L);
        if (!single)
            for (const auto& l : g.legs()) t.legs.push_back({l.vertex, l.deriv});
        Integrand f(std::move(L), {t}, K_, phi);
        Estimate v = finish(f.integrate(q_));
        return single ? v * J : v;
    }

    Estimate vacuum_uncached(const Diagram& v) {
        int root = v.roots().front();
        if (!v.decoration(root).is_zero()) return Estimate(0.0);
        Layout L = tree_layout(v, Ksmall_, {{root, true, {}, {}}});
        IntegrandTerm t;
        t.kernels = kernel_factors(v, L);
        for (int w = 0; w < v.num_vertices(); ++w)
            if (w != root && !v.decoration(w).is_zero()) t.weights.push_back({w, root, v.decoration(w)});
        Integrand f(std::move(L), {t}, Ksmall_, nullptr);
        return finish(f.integrate(q_));
    }

    // One tracked forest term as an integrand on the original vertices.
    std::optional<IntegrandTerm> merged_term(const WorkTerm& w, int n) const {
        const Diagram& g = w.t.g;
        const auto& o = w.t.vertex_origin;
        auto comp = g.components();
        std::vector<int> root_of(g.num_components(), -1);
        for (int r : g.roots()) root_of[comp[r]] = r;
        std::vector<int> hits(n, 0);
        IntegrandTerm t;
        t.coef = to_double(w.coef);
        for (int v = 0; v < g.num_vertices(); ++v) {
            int r = root_of[comp[v]];
            if (r == v) {
                if (!g.decoration(v).is_zero()) return std::nullopt;
                continue;
            }
            ++hits[o[v]];
            if (r >= 0 && !g.decoration(v).is_zero()) t.weights.push_back({o[v], o[r], g.decoration(v)});
        }
        for (int c : hits)
            if (c != 1) throw std::logic_error("forest term does not cover the vertices of the diagram");
        for (const auto& e : g.edges()) t.kernels.push_back({e.label, e.deriv, o[e.src], o[e.dst]});
        for (const auto& l : g.legs()) t.legs.push_back({o[l.vertex], l.deriv});
        return t;
    }

    LabelTable labels_;
    KernelAssignment K_, Ksmall_;
    QuadratureSpec q_;
    AntipodeEngine engine_;
    std::map<std::pair<CanonicalCode, const TestFunction*>, Estimate> canonical_cache_;
    std::vector<TestFunctionPtr> keepalive_;  // cache keys are raw pointers
    std::map<CanonicalCode, Estimate> vacuum_cache_;
    std::optional<Character<Estimate>> bphz_char_;
    long evaluations_ = 0;
};

}  // namespace bphz

#endif
