#include <bphz/io/fixtures.hpp>
#include <bphz/valuation/studies.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace bphz;

namespace {

TestFunctionPtr bumps(std::vector<double> centers, double r) {
    std::vector<Bump> b;
    for (double c : centers) b.emplace_back(std::vector<double>{c}, r);
    return std::make_shared<ProductBump>(b);
}

double psi(double r) {
    if (r <= 0.5) return 1;
    if (r >= 1) return 0;
    double t = 2 * r - 1;
    return 1 - t * t * t * (10 - 15 * t + 6 * t * t);
}

double k_ref(double a, double eps, double x) { return std::pow(x * x + eps * eps, a / 2) * psi(std::abs(x)); }

double bump_ref(double c, double r, double y) {
    double t = (y - c) / r;
    return std::abs(t) < 1 ? std::pow(1 - t * t, 8) : 0.0;
}

// composite Simpson on [lo, hi] with n (even) panels
template <class F>
double simpson(F f, double lo, double hi, int n) {
    double h = (hi - lo) / n, s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

template <class F>
double simpson_pieces(F f, std::vector<double> cuts, int n) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += simpson(f, cuts[i], cuts[i + 1], n);
    return s;
}

}  // namespace

TEST(Quadrature, PolynomialAndSingularIntegrals) {
    AdaptiveCubature cub;
    auto r = cub.integrate([](const double* x) { return x[0] * x[1] * x[1]; }, {0, 0}, {1, 1});
    EXPECT_NEAR(r.value, 1.0 / 6, 1e-14);
    EXPECT_TRUE(r.converged);
    auto s = cub.integrate([](const double* x) { return 1 / std::sqrt(x[0]); }, {0}, {1});
    EXPECT_NEAR(s.value, 2.0, 1e-8);
    EXPECT_LE(std::abs(s.value - 2.0), 10 * s.error + 1e-12);
}

TEST(Quadrature, GenzMalikInHigherDimensions) {
    QuadratureSpec q;
    q.max_evaluations = 149;
    AdaptiveCubature one_box(q);
    // degree 7 monomials are exact on a single box
    auto p = one_box.integrate([](const double* x) { return x[0] * x[0] * x[1] * x[1] * x[2] * x[2] * x[3]; },
                               {0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1});
    EXPECT_NEAR(p.value, 1.0 / 54, 1e-14);
    q = {};
    q.rel_tol = 1e-5;
    AdaptiveCubature cub(q);
    auto g = cub.integrate(
        [](const double* x) {
            double r2 = 0;
            for (int i = 0; i < 6; ++i) r2 += x[i] * x[i];
            return std::exp(-r2);
        },
        std::vector<double>(6, -1), std::vector<double>(6, 1));
    EXPECT_TRUE(g.converged);
    EXPECT_NEAR(g.value, std::pow(std::sqrt(M_PI) * std::erf(1.0), 6), 1e-5 * g.value);
    EXPECT_LE(std::abs(g.value - std::pow(std::sqrt(M_PI) * std::erf(1.0), 6)), g.error);
}

TEST(Quadrature, ReportsFailureWhenBudgetIsExhausted) {
    QuadratureSpec q;
    q.max_evaluations = 200;
    AdaptiveCubature cub(q);
    auto r = cub.integrate([](const double* x) { return std::pow(std::abs(x[0]), -0.9); }, {-1}, {1}, {{0.3}});
    EXPECT_FALSE(r.converged);
}

TEST(TestFunctions, DerivativesMatchFiniteDifferences) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    std::vector<TestFunctionPtr> fs{
        bumps({0.0, 0.2}, 0.7),
        std::make_shared<PolynomialSumBump>(2, Bump({0.1}, 1.2), std::vector<MultiIndex>{MultiIndex(1), MultiIndex(1, {2})}),
        std::make_shared<PolynomialSumBump>(3, Bump({0.0}, 1.5),
                                            std::vector<MultiIndex>{MultiIndex(1), MultiIndex(1, {1}), MultiIndex(1)}),
    };
    for (const auto& f : fs) {
        const int k = f->arity();
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(k);
            for (auto& v : x) v = U(rng);
            for (int i = 0; i < k; ++i) {
                std::vector<MultiIndex> d0(k, MultiIndex(1)), d1 = d0;
                d1[i] = MultiIndex(1, {1});
                const double h = 1e-5;
                auto xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                double fd = ((*f)(d0, xp.data()) - (*f)(d0, xm.data())) / (2 * h);
                EXPECT_NEAR((*f)(d1, x.data()), fd, 1e-5 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST(TestFunctions, PolynomialTimesSumBumpValue) {
    // (y1 - y0)² β(y0 + y1)
    PolynomialSumBump f(2, Bump({0.0}, 1.0), {MultiIndex(1), MultiIndex(1, {2})});
    double y[2] = {0.1, 0.3};
    EXPECT_NEAR(f.value(y), 0.04 * std::pow(1 - 0.16, 8), 1e-14);
    EXPECT_EQ(f.poly_degree(), 2);
}

TEST(TestFunctions, CylinderAndPermutation) {
    auto base = bumps({0.0, 0.4}, 0.5);
    Cylinder c(base);
    double x[3] = {0.1, 0.3, 17.0};
    EXPECT_EQ(c.arity(), 3);
    EXPECT_DOUBLE_EQ(c.value(x), base->value(x));
    PermutedArgs p(base, {1, 0});
    double y[2] = {0.3, 0.1};
    EXPECT_DOUBLE_EQ(p.value(y), base->value(x));
}

TEST(Canonical, E1MatchesDenseGridOracle) {
    auto P = fixtures::build("E1");
    const double eps = 0.1, a = -1.5;
    Evaluator ev(P.labels, P.kernel_assignment(eps));
    auto phi = bumps({0.0, 0.3}, 0.6);
    double got = ev.canonical(P.diagram, phi).value;
    // (y0, h = y1 - y0), kinks of the cutoff on grid lines
    auto inner = [&](double y0) {
        return simpson_pieces([&](double h) { return k_ref(a, eps, h) * bump_ref(0.3, 0.6, y0 + h); },
                              {-1, -0.5, 0, 0.5, 1}, 800) *
               bump_ref(0.0, 0.6, y0);
    };
    double want = simpson(inner, -0.6, 0.6, 1200);
    EXPECT_NEAR(got, want, 1e-8 * std::abs(want));
}

TEST(Canonical, EmptyDiagramIsOne) {
    Evaluator ev(fixtures::triangle_labels(), default_kernels(fixtures::triangle_labels(), 0.1));
    EXPECT_EQ(ev.canonical(Diagram(1), nullptr).value, 1.0);
}

TEST(Canonical, TriangleIsConvolutionAtZero) {
    auto P = fixtures::build("TRI");
    const double eps = 0.2;
    Evaluator ev(P.labels, P.kernel_assignment(eps));
    auto phi = bumps({0.25}, 0.5);
    double got = ev.canonical(P.diagram, phi).value;
    // ∫φ · ∫∫ K1(x1) K2(x2 - x1) K1(-x2)
    double mass = simpson([](double y) { return bump_ref(0.25, 0.5, y); }, -0.25, 0.75, 2000);
    AdaptiveCubature cub;
    auto conv = cub.integrate(
        [&](const double* z) {
            double x1 = z[0], h = z[1];
            return k_ref(-1.0 / 3, eps, x1) * k_ref(-4.0 / 3, eps, h) * k_ref(-1.0 / 3, eps, x1 + h);
        },
        {-1, -1}, {1, 1}, {{-0.5, 0, 0.5}, {-0.5, 0, 0.5}});
    EXPECT_NEAR(got, mass * conv.value, 1e-7 * std::abs(got));
}

TEST(Canonical, TranslationInvariant) {
    auto P = fixtures::build("PAR");
    Evaluator ev(P.labels, P.kernel_assignment(0.1));
    auto phi = bumps({0.0, 0.3}, 0.6);
    auto shifted = phi->shifted({0.37});
    double a = ev.canonical(P.diagram, phi).value, b = ev.canonical(P.diagram, shifted).value;
    EXPECT_NEAR(a, b, 1e-8 * std::abs(a));
}

TEST(Canonical, DeterministicAcrossEvaluators) {
    auto P = fixtures::build("CH2");
    auto phi = bumps({0.0, 0.5}, 0.6);
    Evaluator a(P.labels, P.kernel_assignment(0.1).small_scale_only()), b(P.labels, P.kernel_assignment(0.1).small_scale_only());
    EXPECT_EQ(a.bphz(P.diagram, phi).value, b.bphz(P.diagram, phi).value);
}

TEST(Canonical, SingularKernelRejected) {
    auto P = fixtures::build("E1");
    Evaluator ev(P.labels, P.kernel_assignment(0.0));
    EXPECT_THROW(ev.canonical(P.diagram, bumps({0.0, 0.3}, 0.6)), ValuationError);
    auto Q = fixtures::build("E1_pos");
    Evaluator ok(Q.labels, Q.kernel_assignment(0.0));
    EXPECT_GT(ok.canonical(Q.diagram, bumps({0.0, 0.3}, 0.6)).value, 0.0);
}

TEST(Vacuum, LineIsZerothMoment) {
    auto P = fixtures::build("line");
    Evaluator ev(P.labels, P.kernel_assignment(0.1));
    auto K = P.kernel_assignment(0.1);
    EXPECT_NEAR(ev.vacuum(P.diagram).value, moment(K, P.diagram.edge(0).label, MultiIndex(1)), 1e-10);
}

TEST(Vacuum, DecoratedRootVanishes) {
    auto P = fixtures::build("line");
    Diagram g = P.diagram;
    g.set_decoration(g.roots().front(), MultiIndex(1, {1}));
    Evaluator ev(P.labels, P.kernel_assignment(0.1));
    EXPECT_EQ(ev.vacuum(g).value, 0.0);
}

TEST(Vacuum, ProductOfComponents) {
    auto line = fixtures::build("line"), loop = fixtures::build("bareloop");
    Evaluator ev(line.labels, line.kernel_assignment(0.1));
    Diagram both = loop.diagram;
    int off = both.num_vertices();
    for (int v = 0; v < line.diagram.num_vertices(); ++v) both.add_vertex();
    for (const auto& e : line.diagram.edges()) both.add_edge(e.src + off, e.dst + off, e.label);
    for (int r : line.diagram.roots()) both.add_root(r + off);
    double a = ev.vacuum(line.diagram).value, b = ev.vacuum(loop.diagram).value;
    EXPECT_NEAR(ev.vacuum(both).value, a * b, 1e-12 * std::abs(a * b));
}

TEST(Bphz, TriangleVanishes) {
    auto P = fixtures::build("TRI");
    for (double eps : {0.2, 0.1}) {
        Evaluator ev(P.labels, P.kernel_assignment(eps));
        auto r = ev.bphz(P.diagram, bumps({0.1}, 0.5));
        EXPECT_LE(std::abs(r.value), std::max(10 * r.error_estimate, 1e-12)) << eps;
        EXPECT_LE(std::abs(r.value), 1e-6);
    }
}

TEST(Bphz, NoDivergenceMeansCanonical) {
    auto P = fixtures::build("E1_pos");
    Evaluator ev(P.labels, P.kernel_assignment(0.1));
    auto phi = bumps({0.0, 0.3}, 0.6);
    EXPECT_EQ(ev.bphz(P.diagram, phi).value, ev.canonical(P.diagram, phi).value);
}

TEST(Bphz, RoutesAgree) {
    for (const char* name : {"E1", "E1_m1", "PAR"}) {
        auto P = fixtures::build(name);
        Evaluator ev(P.labels, P.kernel_assignment(0.1));
        auto phi = bumps({0.0, 0.3}, 0.6);
        auto a = ev.bphz(P.diagram, phi, Route::TwistedAntipode);
        auto b = ev.bphz(P.diagram, phi, Route::ForestFormula);
        auto c = ev.bphz(P.diagram, phi, Route::FullForest);
        auto m = ev.merged_forest(P.diagram, phi);
        EXPECT_LE(std::abs(a.value - b.value), 3 * (a.error_estimate + b.error_estimate) + 1e-14) << name;
        EXPECT_LE(std::abs(a.value - c.value), 3 * (a.error_estimate + c.error_estimate) + 1e-14) << name;
        EXPECT_NEAR(a.value, m.value, 1e-6 * std::max(1.0, std::abs(a.value))) << name;
    }
}

TEST(Bphz, ReportSumsTerms) {
    auto P = fixtures::build("PAR");
    Evaluator ev(P.labels, P.kernel_assignment(0.1));
    auto r = ev.bphz(P.diagram, bumps({0.0, 0.3}, 0.6), Route::ForestFormula);
    CompensatedSum s;
    for (const auto& t : r.terms) s.add(t.value);
    EXPECT_EQ(s.value(), r.value);
}

TEST(RenormSimple, SidesAgreeAndMatchBphz) {
    auto P = fixtures::build("E1");
    auto phi = bumps({0.0, 0.3}, 0.6);
    for (double eps : {0.1, 0.0}) {
        auto K = P.kernel_assignment(eps);
        double a = renorm_simple(K, 0, *phi, {}, SubtractionSide::AtY0).value;
        double b = renorm_simple(K, 0, *phi, {}, SubtractionSide::AtY1).value;
        EXPECT_NEAR(a, b, 1e-7) << eps;
        Evaluator ev(P.labels, K);
        double m = ev.merged_forest(P.diagram, phi).value;
        EXPECT_NEAR(a, m, 1e-7) << eps;
        if (eps > 0) {
            EXPECT_NEAR(a, ev.bphz(P.diagram, phi).value, 1e-7);
        }
    }
}

TEST(RenormSimple, NoSubtractionAwayFromDiagonal) {
    auto P = fixtures::build("E1");
    auto K = P.kernel_assignment(0.1);
    auto phi = bumps({-0.45, 0.45}, 0.3);
    Evaluator ev(P.labels, K);
    EXPECT_NEAR(renorm_simple(K, 0, *phi, {}, SubtractionSide::AtY0).value, ev.canonical(P.diagram, phi).value, 1e-10);
}

TEST(RenormSimple, SumCoordinateTestFunctionGivesZero) {
    auto P = fixtures::build("E1");
    auto K = P.kernel_assignment(0.1);
    PolynomialSumBump phi(2, Bump({0.2}, 1.0), {MultiIndex(1), MultiIndex(1)});
    EXPECT_NEAR(renorm_simple(K, 0, phi, {}, SubtractionSide::AtY0).value, 0.0, 1e-8);
}

TEST(WithCharacter, CounitAndNaiveSubtraction) {
    auto P = fixtures::build("E1");
    auto K = P.kernel_assignment(0.1);
    Evaluator ev(P.labels, K);
    auto phi = bumps({0.0, 0.3}, 0.6);
    auto c = ev.with_character(Character<Estimate>::counit(), P.diagram, phi);
    EXPECT_EQ(c.value, ev.canonical(P.diagram, phi).value);
    auto pm = ev.pi_minus();
    Character<Estimate> neg([pm](const Diagram& t) { return -pm(t); });
    auto n = ev.with_character(neg, P.diagram, phi);
    EXPECT_NEAR(n.value, renorm_simple(K, 0, *phi, {}, SubtractionSide::AtY0).value, 1e-7);
}

TEST(Convergence, LogDivergentCanonicalAndCauchyBphz) {
    auto P = fixtures::build("E1_m1");
    auto K = P.kernel_assignment(0.1);
    // narrow ⊗ wide: the ε² log(1/ε) approach of the renormalised values scales with ∫ b0 b1''
    auto phi = std::make_shared<ProductBump>(std::vector<Bump>{Bump({0.0}, 0.3), Bump({0.3}, 3.0)});
    std::vector<double> ladder{0.2, 0.1, 0.05, 0.025};
    auto can = convergence_study(P.labels, K, ladder, P.diagram, phi, {}, StudyKind::Canonical);
    EXPECT_TRUE(can.divergent());
    EXPECT_GT(can.r_squared, 0.99);
    EXPECT_GT(std::abs(can.slope), 0.1);
    auto ren = convergence_study(P.labels, K, ladder, P.diagram, phi, {}, StudyKind::Bphz);
    EXPECT_TRUE(ren.cauchy(1e-3));
}

TEST(Convergence, RejectsUnsortedLadder) {
    auto P = fixtures::build("E1");
    EXPECT_THROW(convergence_study(P.labels, P.kernel_assignment(), {0.1, 0.2}, P.diagram, bumps({0.0, 0.3}, 0.6), {},
                                   StudyKind::Canonical),
                 ValuationError);
}

TEST(Ideal, IbpGeneratorsVanishOnE1) {
    auto P = fixtures::build("E1");
    Evaluator ev(P.labels, P.kernel_assignment(0.1));
    auto phi = bumps({0.0, 0.3}, 0.6);
    for (int v = 0; v < 2; ++v) EXPECT_LE(ideal_annihilation_check(ev, ibp_combination(P.diagram, v, 0), phi), 1e-7);
    EXPECT_EQ(ideal_annihilation_check(ev, FormalSum{}, phi), 0.0);
}

TEST(Ideal, VacuumGeneratorsVanish) {
    auto line = fixtures::build("line");
    Evaluator ev(line.labels, line.kernel_assignment(0.1));
    Diagram dec = line.diagram;
    dec.set_decoration(1 - dec.roots().front(), MultiIndex(1, {2}));
    for (const Diagram& g : {line.diagram, dec, fixtures::build("bareloop").diagram})
        for (const auto& s : vacuum_relation_generators(g)) EXPECT_LE(ideal_annihilation_check(ev, s, nullptr), 1e-7);
}

TEST(LargeScale, RefusesOutsideHPlus) {
    auto P = fixtures::build("CH2_weak");
    Evaluator ev(P.labels, P.kernel_assignment(0.1, 4.0));
    EXPECT_THROW(ev.large_scale(P.diagram, bumps({0.0, 0.5}, 0.6)), ValuationError);
    auto Q = fixtures::build("CH2");
    EXPECT_THROW(Evaluator(Q.labels, Q.kernel_assignment(0.1)), ValuationError);
}

TEST(LargeScale, WithoutTailEqualsBphz) {
    auto P = fixtures::build("CH2");
    auto phi = bumps({0.0, 0.5}, 0.6);
    Evaluator a(P.labels, P.kernel_assignment(0.1).small_scale_only()), b(P.labels, P.kernel_assignment(0.1).small_scale_only());
    EXPECT_EQ(a.large_scale(P.diagram, phi).value, b.bphz(P.diagram, phi).value);
}
