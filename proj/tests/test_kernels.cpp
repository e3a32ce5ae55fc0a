#include <bphz/kernels/kernel.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace bphz;

namespace {

KernelAssignment single(Rational a, double eps, int d = 1, int nmax = 2) {
    KernelAssignment K(d, nmax);
    K.set(0, KernelSpec{a, eps, std::nullopt, false});
    return K;
}

double norm(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// one-dimensional reference for the cutoff
double psi(double r) {
    if (r <= 0.5) return 1;
    if (r >= 1) return 0;
    double t = 2 * r - 1;
    return 1 - t * t * t * (10 - 15 * t + 6 * t * t);
}

}  // namespace

TEST(Kernel, PlugInValues) {
    auto K = single(make_rational(-1), 1.0);
    EXPECT_DOUBLE_EQ(eval_kernel(K, 0, MultiIndex(1), {0.0}), 1.0);
    auto K2 = single(make_rational(-3, 2), 0.1);
    for (double x : {0.0, 0.3, -0.7, 0.95})
        EXPECT_NEAR(eval_kernel(K2, 0, MultiIndex(1), {x}), std::pow(x * x + 0.01, -0.75) * psi(std::abs(x)), 1e-12);
}

TEST(Kernel, CompactSupport) {
    for (int d = 1; d <= 3; ++d) {
        auto K = single(make_rational(-1, 2), 0.1, d);
        std::vector<double> x(d, 0.0);
        x[0] = 1.0;
        EXPECT_EQ(eval_kernel(K, 0, MultiIndex(d), x), 0.0);
        x[0] = 3.0;
        EXPECT_EQ(eval_kernel(K, 0, MultiIndex::unit(d, 0), x), 0.0);
    }
}

TEST(Kernel, DerivativesMatchFiniteDifferences) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int d : {1, 2}) {
        auto K = single(make_rational(-4, 3), 0.1, d);
        int checked = 0;
        while (checked < 100) {
            std::vector<double> x(d);
            for (auto& v : x) v = U(rng);
            double r = norm(x);
            if (std::abs(r - 0.5) < 2e-3 || r > 0.998) continue;
            for (const auto& k : multi_indices_up_to(d, 2)) {
                if (k.is_zero()) continue;
                int i = 0;
                while (k[i] == 0) ++i;
                MultiIndex lower = k - MultiIndex::unit(d, i);
                const double h = 1e-5;
                auto xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                double fd = (eval_kernel(K, 0, lower, xp) - eval_kernel(K, 0, lower, xm)) / (2 * h);
                double ex = eval_kernel(K, 0, k, x);
                EXPECT_NEAR(ex, fd, 1e-6 * std::max(1.0, std::abs(ex))) << "d=" << d;
            }
            ++checked;
        }
    }
}

TEST(Kernel, FirstDerivativeClosedForm) {
    auto K = single(make_rational(-1), 0.2);
    for (double x : {0.1, -0.3, 0.6, -0.8}) {
        double r = std::abs(x), e2 = 0.04;
        double t = 2 * r - 1;
        double dpsi = r > 0.5 ? -60 * t * t * (1 - t) * (1 - t) : 0.0;  // ψ'(r) = -S'(t)·2
        double want = -x * std::pow(x * x + e2, -1.5) * psi(r) + std::pow(x * x + e2, -0.5) * dpsi * (x > 0 ? 1 : -1);
        EXPECT_NEAR(eval_kernel(K, 0, MultiIndex(1, {1}), {x}), want, 1e-10);
    }
}

TEST(Kernel, Symmetric) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto K = single(make_rational(-1, 2), 0.05, 2);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x{U(rng), U(rng)}, mx{-x[0], -x[1]};
        EXPECT_DOUBLE_EQ(eval_kernel(K, 0, MultiIndex(2), x), eval_kernel(K, 0, MultiIndex(2), mx));
        EXPECT_NEAR(eval_kernel(K, 0, MultiIndex(2, {1, 0}), x), -eval_kernel(K, 0, MultiIndex(2, {1, 0}), mx), 1e-9);
    }
}

TEST(Kernel, HomogeneousInsideHalfBall) {
    auto K = single(make_rational(-3, 2), 0.0);
    for (double x : {0.05, 0.1, 0.2}) {
        double a = eval_kernel(K, 0, MultiIndex(1), {x});
        double b = eval_kernel(K, 0, MultiIndex(1), {2 * x});
        EXPECT_NEAR(b / a, std::pow(2.0, -1.5), 1e-12);
    }
}

TEST(Kernel, Errors) {
    auto K = single(make_rational(-1), 0.0);
    EXPECT_THROW(eval_kernel(K, 0, MultiIndex(1), {0.0}), KernelError);
    EXPECT_THROW(eval_kernel(K, 0, MultiIndex(1, {3}), {0.5}), KernelError);
    EXPECT_THROW(eval_kernel(K, 1, MultiIndex(1), {0.5}), KernelError);
    EXPECT_THROW(seminorm_estimate(K, 0, 3, 10), KernelError);
}

TEST(Kernel, LargeScaleTail) {
    KernelAssignment K(1);
    K.set(0, KernelSpec{make_rational(-3, 2), 0.1, make_rational(-3, 2), true, 64.0});
    EXPECT_DOUBLE_EQ(K.reach(0), 64.0);
    for (double x : {2.0, 5.0, 20.0}) {
        double want = std::pow(2 + x * x, -0.75);
        EXPECT_NEAR(eval_kernel(K, 0, MultiIndex(1), {x}), want, 1e-14);
        // |D R| <= C (2+|x|)^{deg_inf}
        EXPECT_LE(std::abs(eval_kernel(K, 0, MultiIndex(1, {1}), {x})), 2 * std::pow(2 + x, -1.5));
    }
    EXPECT_EQ(eval_kernel(K, 0, MultiIndex(1), {64.0}), 0.0);
    auto small = K.small_scale_only();
    EXPECT_EQ(eval_kernel(small, 0, MultiIndex(1), {5.0}), 0.0);
    EXPECT_DOUBLE_EQ(K.with_rho(8).reach(0), 8.0);
}

TEST(Kernel, SeminormDominatesSamplesAndGrowsWithN) {
    auto K = single(make_rational(-1), 1.0);
    double s0 = seminorm_estimate(K, 0, 0, 200);
    // first sample: radius 2^{-12·frac(golden)} on the positive axis
    double r = std::exp2(-12.0 * 0.6180339887498949);
    EXPECT_GE(s0, std::abs(eval_kernel(K, 0, MultiIndex(1), {r})) * r);
    EXPECT_TRUE(std::isfinite(s0));
    double s1 = seminorm_estimate(K, 0, 1, 200), s2 = seminorm_estimate(K, 0, 2, 200);
    EXPECT_GE(s1, s0);
    EXPECT_GE(s2, s1);
}

TEST(Kernel, SeminormUniformInEpsilon) {
    std::vector<double> est;
    for (double eps : {0.2, 0.1, 0.05}) est.push_back(seminorm_estimate(single(make_rational(-1), eps), 0, 2, 400));
    double lo = *std::min_element(est.begin(), est.end()), hi = *std::max_element(est.begin(), est.end());
    EXPECT_LE(hi, 2 * lo);
}

TEST(Kernel, Moments) {
    auto K = single(make_rational(-1, 2), 0.1);
    EXPECT_NEAR(moment(K, 0, MultiIndex(1, {1})), 0.0, 1e-10);
    auto K2 = single(make_rational(-1, 2), 0.1, 2);
    EXPECT_NEAR(moment(K2, 0, MultiIndex(2, {1, 2})), 0.0, 1e-10);
    // ε = 0: ∫ |x|^{-1/2} ψ(|x|) dx, closed form on [0,1/2] plus a band integral
    auto K0 = single(make_rational(-1, 2), 0.0);
    double c0 = moment(K0, 0, MultiIndex(1));
    AdaptiveCubature cub;
    double inner = 4 * std::sqrt(0.5);
    auto band = cub.integrate([](const double* x) { return std::pow(x[0], -0.5) * psi(x[0]); }, {0.5}, {1.0});
    EXPECT_NEAR(c0, inner + 2 * band.value, 1e-8);
    double c1 = moment(single(make_rational(-1, 2), 0.1), 0, MultiIndex(1));
    double c2 = moment(single(make_rational(-1, 2), 0.05), 0, MultiIndex(1));
    EXPECT_LT(std::abs(c1 - c2), std::abs(c1 - c0));
    EXPECT_THROW(moment(single(make_rational(-1), 0.0), 0, MultiIndex(1)), KernelError);
}
