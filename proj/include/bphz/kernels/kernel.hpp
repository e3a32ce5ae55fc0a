#ifndef BPHZ_KERNELS_KERNEL_HPP
#define BPHZ_KERNELS_KERNEL_HPP

#include "../diagrams/labels.hpp"
#include "../diagrams/multi_index.hpp"
#include "../diagrams/rational.hpp"
#include "../valuation/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bphz {

struct KernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Polynomial in r with only the terms we need, plus the operator (1/2r) d/dr,
// which is d/ds for s = r².
class LaurentPoly {
public:
    LaurentPoly() = default;
    explicit LaurentPoly(std::map<int, double> c) : c_(std::move(c)) {}

    LaurentPoly d_ds() const {
        std::map<int, double> out;
        for (auto [p, a] : c_)
            if (p != 0) out[p - 2] += 0.5 * p * a;
        return LaurentPoly(out);
    }
    double operator()(double r) const {
        double acc = 0;
        for (auto [p, a] : c_) acc += a * std::pow(r, p);
        return acc;
    }

private:
    std::map<int, double> c_;
};

// ψ(r) = 1 on [0,1/2], 0 on [1,∞), quintic smoothstep in between. For a
// cutoff radius R the profile is ψ(r/R); returned as a polynomial in r on the
// transition band.
inline LaurentPoly smoothstep_band(double R) {
    // 1 - S(t), t = 2r/R - 1, S(t) = 6t^5 - 15t^4 + 10t^3
    // expand in r via binomial sums
    const double a = 2.0 / R;
    std::map<int, double> c;
    const std::array<std::pair<int, double>, 3> terms{{{5, 6.0}, {4, -15.0}, {3, 10.0}}};
    c[0] += 1.0;
    for (auto [n, w] : terms) {
        // (a r - 1)^n
        double binom = 1.0;
        for (int j = 0; j <= n; ++j) {
            double coef = binom * std::pow(a, j) * (((n - j) % 2) ? -1.0 : 1.0);
            c[j] -= w * coef;
            binom = binom * (n - j) / (j + 1);
        }
    }
    return LaurentPoly(c);
}

// One radial profile F(s) = (s + c)^{p} B(s), s = |x|², with B(s) = ψ(√s/R).
class RadialProfile {
public:
    RadialProfile(double power, double shift, double radius, int max_order)
        : p_(power), c_(shift), R_(radius) {
        if (std::isfinite(R_)) {
            band_.push_back(smoothstep_band(R_));
            for (int m = 1; m <= max_order; ++m) band_.push_back(band_.back().d_ds());
        }
    }

    double radius() const { return R_; }

    // all derivatives F^{(0..n)}(s)
    void derivatives(double s, int n, double* out) const {
        double r = std::sqrt(s);
        if (std::isfinite(R_) && r >= R_) {
            for (int m = 0; m <= n; ++m) out[m] = 0.0;
            return;
        }
        double base = s + c_;
        // power part G^{(j)} = (p)_j base^{p-j}
        double g[16];
        double bj[16];
        if (base == 0.0) {
            for (int j = 0; j <= n; ++j) {
                double e = p_ - j;
                if (e < 0) throw KernelError("SingularAtZero");
                g[j] = e == 0 ? falling(j) : 0.0;
            }
        } else {
            double pw = std::pow(base, p_ - n);
            double inv = 1.0;
            for (int j = n; j >= 0; --j) {
                g[j] = falling(j) * pw * inv;
                inv *= base;
            }
        }
        bool inner = !std::isfinite(R_) || r <= 0.5 * R_;
        for (int j = 0; j <= n; ++j) {
            if (inner)
                bj[j] = j == 0 ? 1.0 : 0.0;
            else
                bj[j] = band_.at(j)(r);
        }
        for (int m = 0; m <= n; ++m) {
            double acc = 0, binom = 1;
            for (int j = 0; j <= m; ++j) {
                acc += binom * g[j] * bj[m - j];
                binom = binom * (m - j) / (j + 1);
            }
            out[m] = acc;
        }
    }

private:
    double falling(int j) const {
        double f = 1;
        for (int i = 0; i < j; ++i) f *= p_ - i;
        return f;
    }
    double p_, c_, R_;
    std::vector<LaurentPoly> band_;
};

// D^k F(|x|²) = Σ_{m ≤ k/2} Π_i k_i!/(m_i!(k_i-2m_i)!) (2x_i)^{k_i-2m_i} F^{(|k|-|m|)}(s)
inline double radial_derivative(const RadialProfile& prof, const MultiIndex& k, const double* x) {
    const int d = k.dim();
    double s = 0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    const int K = k.abs();
    double F[16];
    prof.derivatives(s, K, F);
    if (K == 0) return F[0];
    MultiIndex half(d);
    for (int i = 0; i < d; ++i) half.set(i, k[i] / 2);
    double acc = 0;
    for (const auto& m : multi_indices_below(half)) {
        double w = 1;
        for (int i = 0; i < d; ++i) {
            int rem = k[i] - 2 * m[i];
            double c = 1;
            for (int t = rem + 1; t <= k[i]; ++t) c *= t;  // k!/(k-2m)!
            for (int t = 2; t <= m[i]; ++t) c /= t;
            w *= c * std::pow(2 * x[i], rem);
        }
        acc += w * F[K - m.abs()];
    }
    return acc;
}

struct KernelSpec {
    Rational a;                       // homogeneity, equals deg t
    double epsilon = 0.1;
    std::optional<Rational> deg_inf;  // nullopt is -infinity
    bool large_scale = false;
    double rho = std::numeric_limits<double>::infinity();
};

// K_ε(x) = (|x|²+ε²)^{a/2} ψ(|x|) plus optionally R(x) = (2+|x|²)^{deg∞/2} ψ(|x|/ρ)
class KernelAssignment {
public:
    static constexpr int kDefaultMaxOrder = 2;

    explicit KernelAssignment(int dimension, int max_order = kDefaultMaxOrder) : d_(dimension), nmax_(max_order) {
        if (max_order > 12) throw KernelError("max_order too large");
    }

    int dimension() const { return d_; }
    int max_order() const { return nmax_; }

    void set(int label, KernelSpec spec) {
        if (label >= static_cast<int>(specs_.size())) {
            specs_.resize(label + 1);
            small_.resize(label + 1);
            large_.resize(label + 1);
        }
        small_[label] = std::make_shared<RadialProfile>(to_double(spec.a) / 2, spec.epsilon * spec.epsilon, 1.0, nmax_);
        large_[label].reset();
        if (spec.large_scale && spec.deg_inf)
            large_[label] = std::make_shared<RadialProfile>(to_double(*spec.deg_inf) / 2, 2.0, spec.rho, nmax_);
        specs_[label] = std::move(spec);
    }

    bool has(int label) const { return label >= 0 && label < static_cast<int>(specs_.size()) && small_[label]; }
    const KernelSpec& spec(int label) const {
        if (!has(label)) throw KernelError("UnknownLabel");
        return specs_[label];
    }
    bool has_large_scale(int label) const { return has(label) && large_[label] != nullptr; }

    // support radius along each coordinate
    double reach(int label) const {
        if (!has_large_scale(label)) return 1.0;
        return std::max(1.0, large_[label]->radius());
    }
    double max_reach() const {
        double r = 1.0;
        for (int l = 0; l < static_cast<int>(specs_.size()); ++l)
            if (has(l)) r = std::max(r, reach(l));
        return r;
    }

    // copy with all large-scale parts dropped (counterterms use K only)
    KernelAssignment small_scale_only() const {
        KernelAssignment out(d_, nmax_);
        for (int l = 0; l < static_cast<int>(specs_.size()); ++l) {
            if (!has(l)) continue;
            KernelSpec s = specs_[l];
            s.large_scale = false;
            out.set(l, s);
        }
        return out;
    }

    KernelAssignment with_epsilon(double eps) const {
        KernelAssignment out(d_, nmax_);
        for (int l = 0; l < static_cast<int>(specs_.size()); ++l) {
            if (!has(l)) continue;
            KernelSpec s = specs_[l];
            s.epsilon = eps;
            out.set(l, s);
        }
        return out;
    }

    KernelAssignment with_rho(double rho) const {
        KernelAssignment out(d_, nmax_);
        for (int l = 0; l < static_cast<int>(specs_.size()); ++l) {
            if (!has(l)) continue;
            KernelSpec s = specs_[l];
            s.rho = rho;
            out.set(l, s);
        }
        return out;
    }

    double small(int label, const MultiIndex& k, const double* x) const {
        check(label, k);
        return radial_derivative(*small_[label], k, x);
    }

    double operator()(int label, const MultiIndex& k, const double* x) const {
        check(label, k);
        double v = radial_derivative(*small_[label], k, x);
        if (large_[label]) v += radial_derivative(*large_[label], k, x);
        return v;
    }

private:
    void check(int label, const MultiIndex& k) const {
        if (!has(label)) throw KernelError("UnknownLabel");
        if (k.abs() > nmax_) throw KernelError("DerivativeOrderExceeded");
    }

    int d_, nmax_;
    std::vector<KernelSpec> specs_;
    std::vector<std::shared_ptr<RadialProfile>> small_, large_;
};

inline double eval_kernel(const KernelAssignment& K, int label, const MultiIndex& k, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != K.dimension()) throw KernelError("dimension mismatch");
    return K(label, k, x.data());
}

// Default assignment from a label table: homogeneity = deg, given ε.
inline KernelAssignment default_kernels(const LabelTable& labels, double epsilon, bool large_scale = false,
                                        double rho = std::numeric_limits<double>::infinity()) {
    KernelAssignment K(labels.dimension());
    for (int l = 0; l < labels.size(); ++l)
        K.set(l, KernelSpec{labels[l].deg, epsilon, labels[l].deg_inf, large_scale, rho});
    return K;
}

// sup over sampled x of |D^k K(x)| |x|^{|k| - a}, |k| <= N. Radii are
// log-uniform in [2^-12, 1] along a golden-ratio sequence, directions from a
// Weyl sequence; the small-scale part only.
inline double seminorm_estimate(const KernelAssignment& K, int label, int N, int sample_count) {
    const int d = K.dimension();
    if (N > K.max_order()) throw KernelError("DerivativeOrderExceeded");
    const double a = to_double(K.spec(label).a);
    const double golden = 0.6180339887498949;
    const double weyl[4] = {0.7548776662466927, 0.5698402909980532, 0.4142135623730950, 0.3247179572447460};
    std::vector<MultiIndex> ks;
    for (int n = 0; n <= N; ++n)
        for (const auto& k : multi_indices_up_to(d, n))
            if (k.abs() == n) ks.push_back(k);
    std::vector<double> x(d);
    double best = 0;
    for (int j = 1; j <= sample_count; ++j) {
        double u = std::fmod(j * golden, 1.0);
        double r = std::exp2(-12.0 * u);
        double norm = 0;
        for (int i = 0; i < d; ++i) {
            x[i] = std::fmod(j * weyl[i], 1.0) - 0.5;
            if (d == 1) x[i] = (j % 2) ? 1.0 : -1.0;
            norm += x[i] * x[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0) continue;
        for (int i = 0; i < d; ++i) x[i] *= r / norm;
        for (const auto& k : ks) {
            double v = std::abs(K.small(label, k, x.data())) * std::pow(r, k.abs() - a);
            best = std::max(best, v);
        }
    }
    return best;
}

// c_k = (1/k!) ∫ x^k K(x) dx over the unit ball (small-scale part)
inline double moment(const KernelAssignment& K, int label, const MultiIndex& k, QuadratureSpec q = {}) {
    const int d = K.dimension();
    const KernelSpec& s = K.spec(label);
    if (s.epsilon == 0 && s.a + k.abs() <= -d) throw KernelError("NonIntegrable");
    MultiIndex zero(d);
    AdaptiveCubature cub(q);
    auto f = [&](const double* x) {
        double s2 = 0, w = 1;
        for (int i = 0; i < d; ++i) {
            s2 += x[i] * x[i];
            w *= std::pow(x[i], k[i]);
        }
        if (s2 == 0) return 0.0;
        return w * K.small(label, zero, x);
    };
    std::vector<double> lo(d, -1.0), hi(d, 1.0);
    std::vector<std::vector<double>> br(d, std::vector<double>{-0.5, 0.0, 0.5});
    auto r = cub.integrate(f, lo, hi, br);
    if (!r.converged) throw QuadratureFailure(r);
    return r.value / to_double(k.factorial());
}

}  // namespace bphz

#endif
