#include <catch2/catch_amalgamated.hpp>

#include <Eigen/LU>
#include <cmath>
#include <complex>
#include <random>

#include "oscphase/coeffexpr.hpp"
#include "oscphase/reference.hpp"
#include "oscphase/riccati.hpp"

using namespace oscphase;
using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

namespace {

double inf_op_norm(const CMat& m) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, m.row(i).cwiseAbs().sum());
    return best;
}

Vec sample(const ChebGrid& g, double a, double b, const std::function<double(double)>& f) {
    Vec t = g.mapped_nodes(a, b);
    Vec v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = f(t[i]);
    return v;
}

}  // namespace

TEST_CASE("lg_samples") {
    const int k = 16;
    ChebGrid g(k);

    SECTION("constant coefficient") {
        CVec r = lg_samples(Vec::Ones(k), Vec::Zero(k), 100.0);
        for (int i = 0; i < k; ++i) REQUIRE(r[i] == Cplx(0.0, 100.0));
        CVec r4 = lg_samples(Vec::Constant(k, 4.0), Vec::Zero(k), 10.0);
        for (int i = 0; i < k; ++i) REQUIRE(r4[i] == Cplx(0.0, 20.0));
    }

    SECTION("q = 1 + t on [0,1]") {
        Vec t = g.mapped_nodes(0.0, 1.0);
        Vec q = sample(g, 0.0, 1.0, [](double x) { return 1.0 + x; });
        Vec qp = Vec::Ones(k);
        CVec r = lg_samples(q, qp, 1e3);
        for (int i = 0; i < k; ++i) {
            REQUIRE(r[i].imag() == Catch::Approx(1e3 * std::sqrt(1.0 + t[i])).epsilon(1e-14));
            REQUIRE(r[i].real() == Catch::Approx(-0.25 / (1.0 + t[i])).epsilon(1e-14));
        }
    }

    SECTION("nonpositive coefficient") {
        Vec q = Vec::Ones(k);
        q[5] = 0.0;
        REQUIRE_THROWS_AS(lg_samples(q, Vec::Zero(k), 10.0), QNotPositive);
    }
}

TEST_CASE("riccati_residual") {
    const int k = 16;
    ChebGrid g(k);

    SECTION("constant solution is exact") {
        CVec r = CVec::Constant(k, Cplx(0.0, 50.0));
        CVec f = riccati_residual(g, 0.0, 1.0, r, Vec::Ones(k), 50.0);
        REQUIRE(inf_norm(f) <= 1e-12);
    }

    SECTION("zero solution leaves omega^2 q") {
        Vec q = sample(g, 0.0, 1.0, [](double x) { return 1.0 + x * x; });
        CVec f = riccati_residual(g, 0.0, 1.0, CVec::Zero(k), q, 7.0);
        for (int i = 0; i < k; ++i) {
            REQUIRE(f[i].real() == Catch::Approx(49.0 * q[i]).epsilon(1e-14));
            REQUIRE(f[i].imag() == 0.0);
        }
    }

    SECTION("Liouville-Green residual for q = 1 + t^2 matches the closed form") {
        // r_LG' + r_LG^2 + w^2 q = -q''/(4q) + (5/16) q'^2/q^2 (the w terms cancel)
        const double w = 1e3;
        Vec t = g.mapped_nodes(0.0, 1.0);
        Vec q(k), qp(k);
        for (int i = 0; i < k; ++i) {
            q[i] = 1.0 + t[i] * t[i];
            qp[i] = 2.0 * t[i];
        }
        CVec r = lg_samples(q, qp, w);
        CVec f = riccati_residual(g, 0.0, 1.0, r, q, w);
        for (int i = 0; i < k; ++i) {
            double expected = -2.0 / (4.0 * q[i]) + (5.0 / 16.0) * qp[i] * qp[i] / (q[i] * q[i]);
            REQUIRE(std::abs(f[i] - expected) <= 1e-3);
        }
        REQUIRE(inf_norm(f) / (w * w) < 1e-2 * (1.0 / w));
    }
}

TEST_CASE("linearized_step") {
    const int k = 16;
    ChebGrid g(k);

    SECTION("zero residual gives zero update") {
        CVec r = CVec::Constant(k, Cplx(0.1, 30.0));
        CVec h = linearized_step(g, 0.0, 1.0, r, CVec::Zero(k));
        REQUIRE(inf_norm(h) == 0.0);
    }

    SECTION("constant residual with constant r") {
        const double w = 250.0;
        CVec r = CVec::Constant(k, Cplx(0.0, w));
        CVec fr = CVec::Constant(k, Cplx(3.0, -2.0));
        CVec h = linearized_step(g, 0.0, 1.0, r, fr);
        for (int i = 0; i < k; ++i)
            REQUIRE(std::abs(h[i] - (-fr[i] / Cplx(0.0, 2.0 * w))) <= 1e-15 * w);
    }

    SECTION("zero entries are rejected") {
        CVec r = CVec::Constant(k, Cplx(0.0, 10.0));
        r[2] = 0.0;
        REQUIRE_THROWS_AS(linearized_step(g, 0.0, 1.0, r, CVec::Ones(k)), SingularLinearization);
    }

    SECTION("second fixed-point iterate vs dense solve") {
        std::mt19937 rng(4242);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double a = 0.0, b = 1.0, w = 2e3;
        for (int rep = 0; rep < 10; ++rep) {
            CVec r(k), fr(k);
            for (int i = 0; i < k; ++i) {
                r[i] = Cplx(0.3 * u(rng), w * (1.0 + 0.3 * u(rng)));
                fr[i] = w * w * Cplx(u(rng), u(rng));
            }
            CVec h = linearized_step(g, a, b, r, fr);

            CMat m = (2.0 / (b - a)) * g.diff().cast<Cplx>();
            CMat d2inv = CMat::Zero(k, k);
            for (int i = 0; i < k; ++i) d2inv(i, i) = 1.0 / (2.0 * r[i]);
            CMat sp = d2inv * m;  // preconditioned derivative term
            CVec y = -(d2inv * fr);

            // the preconditioned residual of h2 is exactly sp^2 y
            CVec pres = h + sp * h - y;
            double bound = inf_op_norm(sp * sp) * inf_norm(y);
            REQUIRE(inf_norm(pres) <= bound * (1.0 + 1e-10) + 1e-14 * inf_norm(y));

            // and h2 matches the exact dense solve within the same budget
            CMat amat = m;
            for (int i = 0; i < k; ++i) amat(i, i) += 2.0 * r[i];
            CVec hstar = amat.partialPivLu().solve(CVec(-fr));
            double snorm = inf_op_norm(sp);
            REQUIRE(snorm < 0.5);
            REQUIRE(inf_norm(CVec(h - hstar)) <=
                    bound / (1.0 - snorm) * (1.0 + 1e-8) + 1e-14 * inf_norm(hstar));
        }
    }
}

TEST_CASE("newton_solve") {
    const int k = 16;
    ChebGrid g(k);
    SolverConfig cfg;

    SECTION("constant coefficient converges immediately") {
        RiccatiResult res = newton_solve(g, 0.0, 1.0, Vec::Ones(k), 100.0, cfg);
        REQUIRE(res.iterations == 1);
        for (int i = 0; i < k; ++i) REQUIRE(std::abs(res.r[i] - Cplx(0.0, 100.0)) <= 1e-10);
    }

    SECTION("q = 1 + t^2/2 at omega = 1e4: residual oracle") {
        const double w = 1e4;
        Vec q = sample(g, 0.0, 1.0, [](double t) { return 1.0 + 0.5 * t * t; });
        RiccatiResult res = newton_solve(g, 0.0, 1.0, q, w, cfg);
        CVec f = riccati_residual(g, 0.0, 1.0, res.r, q, w);
        REQUIRE(inf_norm(f) < 1e-10 * w * w);
        for (int i = 0; i < k; ++i) REQUIRE(res.r[i].imag() > 0.0);
    }

    SECTION("Legendre normal form on a high-frequency subinterval") {
        const int n = 1 << 10;
        auto spec = CoefficientSpec::catalog("legendre", {{"n", double(n)}});
        const double a = 0.0, b = 0.25;
        Vec t = g.mapped_nodes(a, b);
        Vec q(k);
        for (int i = 0; i < k; ++i) q[i] = eval_q(spec, t[i], 1.0);
        REQUIRE(gamma(q.minCoeff(), 1.0, a, b) > cfg.thresh);
        RiccatiResult res = newton_solve(g, a, b, q, 1.0, cfg);
        for (int i = 0; i < k; ++i) {
            double oracle = legendre_alpha_exact(n, t[i]);
            REQUIRE(std::abs(res.r[i].imag() - oracle) <= 1e-11 * oracle);
        }
    }

    SECTION("divergence cap") {
        SolverConfig tight = cfg;
        tight.max_newton = 1;
        tight.eps = 1e-16;
        Vec q = sample(g, 0.0, 1.0, [](double t) { return 1.0 + 0.5 * t * t; });
        REQUIRE_THROWS_AS(newton_solve(g, 0.0, 1.0, q, 50.0, tight), NewtonDivergence);
    }
}

TEST_CASE("gamma criterion") {
    SolverConfig cfg;
    REQUIRE(gamma(1.0, 100.0, 0.0, 1.0) == Catch::Approx(100.0));
    REQUIRE(gamma(1.0, 100.0, 0.0, 1.0) > cfg.thresh);
    REQUIRE(gamma(1.0, 5.0, 0.0, 1.0) == Catch::Approx(5.0));
    REQUIRE_FALSE(gamma(1.0, 5.0, 0.0, 1.0) > cfg.thresh);
    // gamma == thresh is not high frequency (strict inequality)
    REQUIRE(gamma(0.25, 40.0, 0.0, 0.5) == Catch::Approx(10.0));
    REQUIRE_FALSE(gamma(0.25, 40.0, 0.0, 0.5) > cfg.thresh);
}

TEST_CASE("property: quadratic convergence of the Newton updates") {
    const int k = 16;
    ChebGrid g(k);
    SolverConfig cfg;
    const double w = 1e4;
    Vec q = sample(g, 0.0, 1.0, [](double t) { return 1.0 + 0.5 * t * t; });
    RiccatiResult res = newton_solve(g, 0.0, 1.0, q, w, cfg);
    REQUIRE(res.iterations <= 6);
    double floor = 10.0 * cfg.eps * w;
    for (std::size_t i = 0; i + 1 < res.update_norms.size(); ++i) {
        if (res.update_norms[i] <= floor) break;
        double ratio = res.update_norms[i + 1] / (res.update_norms[i] * res.update_norms[i]);
        REQUIRE(ratio < 1e4);  // h_{i+1} <= C h_i^2 with moderate C
    }
}

TEST_CASE("property: converged r reproduces the phase derivative relations") {
    // spectral d/dt of Im r matches -2 Im(r) Re(r) (= alpha'')
    const int k = 16;
    ChebGrid g(k);
    SolverConfig cfg;
    const double w = 1e4;
    Vec q = sample(g, 0.0, 1.0, [](double t) { return 1.0 + 0.5 * t * t; });
    RiccatiResult res = newton_solve(g, 0.0, 1.0, q, w, cfg);
    Vec ap = res.r.imag();
    Vec app_from_r = -2.0 * ap.cwiseProduct(Vec(res.r.real()));
    Vec app_spectral = 2.0 * (g.diff() * ap);
    double scale = w * std::max(1.0, app_from_r.cwiseAbs().maxCoeff() / w);
    REQUIRE((app_spectral - app_from_r).cwiseAbs().maxCoeff() <= 1e-8 * scale);
}

TEST_CASE("property: first-order scale covariance in omega") {
    const int k = 16;
    ChebGrid g(k);
    SolverConfig cfg;
    Vec q = sample(g, 0.0, 1.0, [](double t) { return 1.0 + 0.5 * t * t; });
    const double w = 500.0, c = 2.0;
    RiccatiResult r1 = newton_solve(g, 0.0, 1.0, q, w, cfg);
    RiccatiResult r2 = newton_solve(g, 0.0, 1.0, q, c * w, cfg);
    double gam = gamma(q.minCoeff(), w, 0.0, 1.0);
    for (int i = 0; i < k; ++i) {
        double ratio = r2.r[i].imag() / (c * r1.r[i].imag());
        REQUIRE(std::abs(ratio - 1.0) <= 10.0 / gam);
    }
}
