#ifndef BPHZ_VALUATION_QUADRATURE_HPP
#define BPHZ_VALUATION_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace bphz {

struct QuadratureSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    long max_evaluations = 60'000'000;
    int order = 5;
    // boxes of this dimension or more use the Genz–Malik rule
    int genz_malik_dim = 6;
};

struct QuadratureResult {
    double value = 0;
    double error = 0;
    long evaluations = 0;
    long boxes = 0;
    bool converged = true;
};

struct QuadratureFailure : std::runtime_error {
    QuadratureResult partial;
    explicit QuadratureFailure(QuadratureResult r) : std::runtime_error("QuadratureFailure"), partial(r) {}
};

// Neumaier compensated sum
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0, comp_ = 0;
};

// Gauss–Legendre nodes and weights on [-1,1]
struct GaussRule {
    std::vector<double> x, w;

    static GaussRule make(int n) {
        GaussRule r;
        r.x.resize(n);
        r.w.resize(n);
        for (int i = 0; i < n; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double pn = n == 1 ? z : p1;
                double pm = n == 1 ? 1 : p0;
                double dp = n * (z * pn - pm) / (z * z - 1);
                double dz = pn / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = n == 1 ? z : p1;
            double pm = n == 1 ? 1 : p0;
            double dp = n * (z * pn - pm) / (z * z - 1);
            r.x[i] = -z;
            r.w[i] = 2 / ((1 - z * z) * dp * dp);
        }
        return r;
    }
};

// Legendre polynomial value P_k(t)
inline double legendre(int k, double t) {
    if (k == 0) return 1;
    double p0 = 1, p1 = t;
    for (int j = 2; j <= k; ++j) {
        double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// Adaptive tensor Gauss–Legendre. Each box is integrated with n and n-1
// points per axis; the difference is the local error. The box with the
// largest error is bisected along the axis whose top Legendre coefficients
// are largest. Initial boxes come from the per-axis breakpoints.
class AdaptiveCubature {
public:
    using Fn = std::function<double(const double*)>;

    explicit AdaptiveCubature(QuadratureSpec spec = {}) : spec_(spec) {
        hi_ = GaussRule::make(spec_.order);
        lo_ = GaussRule::make(spec_.order - 1);
        for (int k = spec_.order - 2; k < spec_.order; ++k) {
            std::vector<double> v;
            for (double x : hi_.x) v.push_back(legendre(k, x) * (2 * k + 1) / 2.0);
            leg_.push_back(v);
        }
    }

    QuadratureResult integrate(const Fn& f, const std::vector<double>& lo, const std::vector<double>& hi,
                               const std::vector<std::vector<double>>& breaks = {}) const {
        const int D = static_cast<int>(lo.size());
        QuadratureResult res;
        if (D == 0) {
            res.value = f(nullptr);
            res.evaluations = 1;
            return res;
        }
        // initial grid
        std::vector<std::vector<double>> cuts(D);
        for (int i = 0; i < D; ++i) {
            cuts[i].push_back(lo[i]);
            if (i < static_cast<int>(breaks.size()))
                for (double b : breaks[i])
                    if (b > lo[i] && b < hi[i]) cuts[i].push_back(b);
            cuts[i].push_back(hi[i]);
            std::sort(cuts[i].begin(), cuts[i].end());
            cuts[i].erase(std::unique(cuts[i].begin(), cuts[i].end()), cuts[i].end());
        }
        std::vector<Box> boxes;
        std::vector<int> idx(D, 0);
        while (true) {
            Box b;
            b.lo.resize(D);
            b.hi.resize(D);
            for (int i = 0; i < D; ++i) {
                b.lo[i] = cuts[i][idx[i]];
                b.hi[i] = cuts[i][idx[i] + 1];
            }
            boxes.push_back(std::move(b));
            int i = 0;
            while (i < D && ++idx[i] == static_cast<int>(cuts[i].size()) - 1) idx[i++] = 0;
            if (i == D) break;
        }

        auto cmp = [](const Box& a, const Box& b) {
            if (a.err != b.err) return a.err < b.err;
            return a.seq > b.seq;
        };
        std::priority_queue<Box, std::vector<Box>, decltype(cmp)> queue(cmp);
        long seq = 0;
        double total_err = 0;
        CompensatedSum running;
        for (auto& b : boxes) {
            evaluate(f, b, res.evaluations);
            b.seq = seq++;
            total_err += b.err;
            running.add(b.value);
            queue.push(std::move(b));
        }
        double value = running.value();
        while (true) {
            double target = std::max(spec_.abs_tol, spec_.rel_tol * std::abs(value));
            if (total_err <= target) break;
            if (res.evaluations >= spec_.max_evaluations) {
                res.converged = false;
                break;
            }
            Box b = queue.top();
            queue.pop();
            Box c1 = b, c2 = b;
            double mid = 0.5 * (b.lo[b.split] + b.hi[b.split]);
            c1.hi[b.split] = mid;
            c2.lo[b.split] = mid;
            evaluate(f, c1, res.evaluations);
            evaluate(f, c2, res.evaluations);
            c1.seq = seq++;
            c2.seq = seq++;
            value += c1.value + c2.value - b.value;
            total_err += c1.err + c2.err - b.err;
            queue.push(std::move(c1));
            queue.push(std::move(c2));
            // drift control
            if (seq % 4096 == 0) {
                auto copy = queue;
                CompensatedSum s, e;
                while (!copy.empty()) {
                    s.add(copy.top().value);
                    e.add(copy.top().err);
                    copy.pop();
                }
                value = s.value();
                total_err = e.value();
            }
        }
        // final deterministic sum, ordered by creation
        std::vector<Box> all;
        all.reserve(queue.size());
        while (!queue.empty()) {
            all.push_back(queue.top());
            queue.pop();
        }
        std::sort(all.begin(), all.end(), [](const Box& a, const Box& b) { return a.seq < b.seq; });
        CompensatedSum s, e;
        for (const auto& b : all) {
            s.add(b.value);
            e.add(b.err);
        }
        res.value = s.value();
        res.error = e.value();
        res.boxes = static_cast<long>(all.size());
        return res;
    }

private:
    struct Box {
        std::vector<double> lo, hi;
        double value = 0, err = 0;
        int split = 0;
        long seq = 0;
    };

    void evaluate(const Fn& f, Box& b, long& evals) const {
        if (static_cast<int>(b.lo.size()) >= spec_.genz_malik_dim)
            genz_malik(f, b, evals);
        else
            tensor(f, b, evals);
    }

    // degree 7 rule with embedded degree 5 rule, 2^D + 2D^2 + 2D + 1 points
    void genz_malik(const Fn& f, Box& b, long& evals) const {
        const int D = static_cast<int>(b.lo.size());
        const double l2 = std::sqrt(9.0 / 70), l4 = std::sqrt(9.0 / 10), l5 = std::sqrt(9.0 / 19);
        const double dd = D;
        const double w1 = (12824 - 9120 * dd + 400 * dd * dd) / 19683, w2 = 980.0 / 6561,
                     w3 = (1820 - 400 * dd) / 19683, w4 = 200.0 / 19683, w5 = 6859.0 / 19683 / std::ldexp(1.0, D);
        const double e1 = (729 - 950 * dd + 50 * dd * dd) / 729, e2 = 245.0 / 486, e3 = (265 - 100 * dd) / 1458,
                     e4 = 25.0 / 729;
        std::vector<double> half(D), mid(D), pt(D);
        double vol = 1;
        for (int i = 0; i < D; ++i) {
            half[i] = 0.5 * (b.hi[i] - b.lo[i]);
            mid[i] = 0.5 * (b.hi[i] + b.lo[i]);
            vol *= b.hi[i] - b.lo[i];
        }
        auto at = [&](const double* p) {
            ++evals;
            return f(p);
        };
        pt = mid;
        const double f0 = at(pt.data());
        CompensatedSum s2, s3, s4, s5;
        int best = 0;
        double bestv = -1;
        for (int i = 0; i < D; ++i) {
            pt[i] = mid[i] - l2 * half[i];
            double a = at(pt.data());
            pt[i] = mid[i] + l2 * half[i];
            a += at(pt.data());
            pt[i] = mid[i] - l4 * half[i];
            double c = at(pt.data());
            pt[i] = mid[i] + l4 * half[i];
            c += at(pt.data());
            pt[i] = mid[i];
            s2.add(a);
            s3.add(c);
            double fourth = std::abs(a - 2 * f0 - (c - 2 * f0) / 7);
            if (fourth > bestv * (1 + 1e-12) || (fourth == bestv && half[i] > half[best])) {
                bestv = fourth;
                best = i;
            }
        }
        for (int i = 0; i < D; ++i)
            for (int j = i + 1; j < D; ++j)
                for (int si : {-1, 1})
                    for (int sj : {-1, 1}) {
                        pt[i] = mid[i] + si * l4 * half[i];
                        pt[j] = mid[j] + sj * l4 * half[j];
                        s4.add(at(pt.data()));
                        pt[i] = mid[i];
                        pt[j] = mid[j];
                    }
        for (long m = 0; m < (1L << D); ++m) {
            for (int i = 0; i < D; ++i) pt[i] = mid[i] + ((m >> i) & 1 ? l5 : -l5) * half[i];
            s5.add(at(pt.data()));
        }
        const double r7 = w1 * f0 + w2 * s2.value() + w3 * s3.value() + w4 * s4.value() + w5 * s5.value();
        const double r5 = e1 * f0 + e2 * s2.value() + e3 * s3.value() + e4 * s4.value();
        b.value = r7 * vol;
        b.err = std::abs(r7 - r5) * vol;
        if (bestv <= 0)
            for (int i = 0; i < D; ++i)
                if (half[i] > half[best]) best = i;
        b.split = best;
    }

    void tensor(const Fn& f, Box& b, long& evals) const {
        const int D = static_cast<int>(b.lo.size());
        const int n = spec_.order;
        std::vector<double> half(D), mid(D), pt(D);
        double vol = 1;
        for (int i = 0; i < D; ++i) {
            half[i] = 0.5 * (b.hi[i] - b.lo[i]);
            mid[i] = 0.5 * (b.hi[i] + b.lo[i]);
            vol *= half[i];
        }
        // high rule, with per-axis Legendre coefficients of the top two orders
        std::vector<int> id(D, 0);
        CompensatedSum qh;
        std::vector<double> coef(2 * D, 0.0);
        while (true) {
            double w = 1;
            for (int i = 0; i < D; ++i) {
                pt[i] = mid[i] + half[i] * hi_.x[id[i]];
                w *= hi_.w[id[i]];
            }
            double v = f(pt.data());
            ++evals;
            qh.add(w * v);
            for (int i = 0; i < D; ++i) {
                double wi = w * v;
                coef[2 * i] += wi * leg_[0][id[i]];
                coef[2 * i + 1] += wi * leg_[1][id[i]];
            }
            int i = 0;
            while (i < D && ++id[i] == n) id[i++] = 0;
            if (i == D) break;
        }
        // low rule
        std::fill(id.begin(), id.end(), 0);
        CompensatedSum ql;
        const int m = n - 1;
        while (true) {
            double w = 1;
            for (int i = 0; i < D; ++i) {
                pt[i] = mid[i] + half[i] * lo_.x[id[i]];
                w *= lo_.w[id[i]];
            }
            double v = f(pt.data());
            ++evals;
            ql.add(w * v);
            int i = 0;
            while (i < D && ++id[i] == m) id[i++] = 0;
            if (i == D) break;
        }
        b.value = qh.value() * vol;
        b.err = std::abs(qh.value() - ql.value()) * vol;
        int best = 0;
        double bestv = -1;
        for (int i = 0; i < D; ++i) {
            double ind = (std::abs(coef[2 * i]) + std::abs(coef[2 * i + 1]));
            if (ind > bestv * (1 + 1e-12)) {
                bestv = ind;
                best = i;
            }
        }
        // fall back to the longest side when the indicator is flat
        if (bestv <= 0) {
            double len = -1;
            for (int i = 0; i < D; ++i)
                if (half[i] > len) {
                    len = half[i];
                    best = i;
                }
        }
        b.split = best;
    }

    QuadratureSpec spec_;
    GaussRule hi_, lo_;
    std::vector<std::vector<double>> leg_;
};

}  // namespace bphz

#endif
