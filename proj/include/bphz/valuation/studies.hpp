#ifndef BPHZ_VALUATION_STUDIES_HPP
#define BPHZ_VALUATION_STUDIES_HPP

#include "../diagrams/relations.hpp"
#include "evaluator.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace bphz {

enum class SubtractionSide { AtY0, AtY1 };

// Π(line)(φ) with the Taylor subtraction of φ around the diagonal, for the
// single edge y0 → y1 carrying `label`. Subtracting at y0 expands φ(y0, ·)
// around y0; AtY1 expands φ(·, y1) around y1. The difference h = y1 - y0 is
// integrated per coordinate in the variable u with h = u|u|, which keeps the
// integrand bounded at ε = 0.
inline Estimate renorm_simple(const KernelAssignment& K, int label, const TestFunction& phi, QuadratureSpec q,
                              SubtractionSide side) {
    if (phi.arity() != 2) throw ValuationError("renorm_simple needs a 2-ary test function");
    const int d = K.dimension();
    const double a = to_double(K.spec(label).a);
    std::vector<MultiIndex> ks;
    for (const auto& k : multi_indices_up_to(d, std::max(0, static_cast<int>(std::floor(-d - a)))))
        if (k.abs() + a <= -d) ks.push_back(k);
    const double reach = K.reach(label);
    const int base = side == SubtractionSide::AtY0 ? 0 : 1;

    std::vector<double> lo, hi;
    std::vector<std::vector<double>> br;
    for (int j = 0; j < d; ++j) {
        auto s = phi.support(base, j, reach);
        if (!s.finite()) throw ValuationError("test function without compact support");
        lo.push_back(s.lo);
        hi.push_back(s.hi);
        br.push_back(phi.breakpoints(base, j));
    }
    const double ur = std::sqrt(reach);
    for (int j = 0; j < d; ++j) {
        lo.push_back(-ur);
        hi.push_back(ur);
        br.push_back({0.0, -std::sqrt(0.5), std::sqrt(0.5)});
    }

    const std::vector<MultiIndex> zero(2, MultiIndex(d));
    auto f = [&](const double* z) {
        thread_local std::vector<double> h, pt, diag, sub;
        h.resize(d);
        pt.resize(2 * d);
        diag.resize(2 * d);
        double jac = 1;
        bool at_zero = true;
        for (int j = 0; j < d; ++j) {
            double u = z[d + j];
            h[j] = u * std::abs(u);
            jac *= 2 * std::abs(u);
            at_zero = at_zero && h[j] == 0;
        }
        if (at_zero) return 0.0;
        // the other point sits at y_base ± h
        const double sgn = side == SubtractionSide::AtY0 ? 1.0 : -1.0;
        for (int j = 0; j < d; ++j) {
            pt[base * d + j] = z[j];
            pt[(1 - base) * d + j] = z[j] + sgn * h[j];
            diag[j] = z[j];
            diag[d + j] = z[j];
        }
        double kv = K(label, MultiIndex(d), h.data());
        if (kv == 0) return 0.0;
        double remainder = phi(zero, pt.data());
        std::vector<MultiIndex> kk(2, MultiIndex(d));
        for (const auto& k : ks) {
            kk[1 - base] = k;
            double mono = 1;
            for (int j = 0; j < d; ++j) mono *= std::pow(sgn * h[j], k[j]);
            remainder -= mono / k.factorial_double() * phi(kk, diag.data());
        }
        return kv * remainder * jac;
    };
    AdaptiveCubature cub(q);
    auto r = cub.integrate(f, lo, hi, br);
    if (!r.converged) throw QuadratureFailure(r);
    return Estimate(r.value, r.error);
}

enum class StudyKind { Canonical, Bphz };

struct ConvergenceRow {
    double epsilon, value, error;
};

// Values over a decreasing ε ladder, with a least-squares fit of value
// against log(1/ε) and the successive differences.
struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double slope = 0, intercept = 0, slope_stderr = 0, r_squared = 0;

    std::vector<double> differences() const {
        std::vector<double> out;
        for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(std::abs(rows[i].value - rows[i - 1].value));
        return out;
    }
    bool divergent() const { return std::abs(slope) > 5 * slope_stderr; }
    bool cauchy(double final_gap) const {
        auto d = differences();
        if (d.empty()) return false;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (!(d[i] < d[i - 1])) return false;
        return d.back() <= final_gap;
    }

    void fit() {
        const int n = static_cast<int>(rows.size());
        if (n < 3) return;
        double sx = 0, sy = 0;
        for (const auto& r : rows) {
            sx += std::log(1 / r.epsilon);
            sy += r.value;
        }
        double mx = sx / n, my = sy / n, sxx = 0, sxy = 0, syy = 0;
        for (const auto& r : rows) {
            double x = std::log(1 / r.epsilon) - mx, y = r.value - my;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
        }
        slope = sxy / sxx;
        intercept = my - slope * mx;
        double ssr = 0;
        for (const auto& r : rows) {
            double res = r.value - intercept - slope * std::log(1 / r.epsilon);
            ssr += res * res;
        }
        slope_stderr = std::sqrt(ssr / (n - 2) / sxx);
        r_squared = syy > 0 ? 1 - ssr / syy : 1.0;
    }
};

inline ConvergenceTable convergence_study(const LabelTable& labels, const KernelAssignment& K,
                                          const std::vector<double>& epsilons, const Diagram& gamma,
                                          const TestFunctionPtr& phi, QuadratureSpec q, StudyKind which,
                                          Route route = Route::TwistedAntipode) {
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1])) throw ValuationError("epsilon list must be strictly decreasing");
    ConvergenceTable t;
    for (double eps : epsilons) {
        Evaluator ev(labels, K.with_epsilon(eps), q);
        if (which == StudyKind::Canonical) {
            auto e = ev.canonical(gamma, phi);
            t.rows.push_back({eps, e.value, e.error});
        } else {
            auto r = ev.bphz(gamma, phi, route);
            t.rows.push_back({eps, r.value, r.error_estimate});
        }
    }
    if (std::find(epsilons.begin(), epsilons.end(), 0.0) == epsilons.end()) t.fit();
    return t;
}

// |Π^K(s)(φ)| for a sum of diagrams with legs, |Π₋^K(s)| when phi is null.
inline double ideal_annihilation_check(Evaluator& ev, const FormalSum& s, const TestFunctionPtr& phi) {
    CompensatedSum acc;
    for (const auto& [key, t] : s) {
        Estimate v = phi ? ev.canonical(t.diagram, phi) : ev.vacuum(t.diagram);
        acc.add(to_double(t.coef) * v.value);
    }
    return std::abs(acc.value());
}

}  // namespace bphz

#endif
