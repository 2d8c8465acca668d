#pragma once

#include <complex>
#include <vector>

#include "chebyshev.hpp"
#include "config.hpp"

namespace oscphase {

// One converged Riccati solve on an interval: samples of the slowly varying
// solution r with Im r = alpha' > 0, plus the Newton iteration record.
struct RiccatiResult {
    CVec r;
    int iterations = 0;
    double final_update_norm = 0.0;
    std::vector<double> update_norms;  // infinity norm of every Newton update
};

// gamma = omega sqrt(q_min) (b - a); an interval is in the high-frequency
// regime when gamma exceeds thresh (strictly).
inline double gamma(double q_min, double omega, double a, double b) {
    return omega * std::sqrt(q_min) * (b - a);
}

inline double inf_norm(const CVec& v) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

// Real matrix acting on a complex vector.
inline CVec apply_real(const Mat& m, const CVec& v) {
    Vec re = m * v.real();
    Vec im = m * v.imag();
    CVec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = {re[i], im[i]};
    return out;
}

// Logarithmic derivative of the Liouville-Green approximate,
// r_LG(t) = i omega sqrt(q) - q'/(4q), sampled at the nodes.
inline CVec lg_samples(const Vec& q, const Vec& qp, double omega) {
    CVec r(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (!(q[i] > 0.0))
            throw QNotPositive("lg_samples: coefficient must be positive at every node");
        r[i] = {-0.25 * qp[i] / q[i], omega * std::sqrt(q[i])};
    }
    return r;
}

// F(r) = (2/(b-a)) D r + r o r + omega^2 q.
inline CVec riccati_residual(const ChebGrid& g, double a, double b, const CVec& r, const Vec& q,
                             double omega) {
    CVec dr = apply_real(g.diff(), r);
    const double scale = 2.0 / (b - a);
    const double w2 = omega * omega;
    CVec f(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) f[i] = scale * dr[i] + r[i] * r[i] + w2 * q[i];
    return f;
}

// Second fixed-point iterate h2 for the linearized equation
//   (diag(2r) + (2/(b-a)) D) h = -Fr:
// with g = diag(2r)^-1 Fr,  h2 = diag(2r)^-1 (2/(b-a)) D g - g.
// The residual of the linearized equation at h2 is exactly
// ((2/(b-a)) D diag(2r)^-1)^2 Fr, second order in the preconditioned
// derivative term.
inline CVec linearized_step(const ChebGrid& g, double a, double b, const CVec& r,
                            const CVec& fr) {
    CVec gv(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        std::complex<double> d = 2.0 * r[i];
        if (d == std::complex<double>(0.0, 0.0))
            throw SingularLinearization("linearized_step: zero entry in r");
        gv[i] = fr[i] / d;
    }
    CVec dg = apply_real(g.diff(), gv);
    const double scale = 2.0 / (b - a);
    CVec h(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) h[i] = scale * dg[i] / (2.0 * r[i]) - gv[i];
    return h;
}

// Newton-Kantorovich iteration started from the Liouville-Green samples;
// stops once ||h|| <= eps ||r_i|| and returns r_{i+1}.  The coefficient
// derivative needed by r_LG is obtained spectrally from the q samples.
inline RiccatiResult newton_solve(const ChebGrid& g, double a, double b, const Vec& q,
                                  double omega, const SolverConfig& cfg) {
    Vec qp = (2.0 / (b - a)) * (g.diff() * q);
    RiccatiResult res;
    res.r = lg_samples(q, qp, omega);
    for (int it = 0; it < cfg.max_newton; ++it) {
        CVec fr = riccati_residual(g, a, b, res.r, q, omega);
        CVec h = linearized_step(g, a, b, res.r, fr);
        double rn = inf_norm(res.r);
        double hn = inf_norm(h);
        res.r += h;
        res.update_norms.push_back(hn);
        res.iterations = it + 1;
        res.final_update_norm = hn;
        if (hn <= cfg.eps * rn) {
            for (Eigen::Index i = 0; i < res.r.size(); ++i)
                if (!(res.r[i].imag() > 0.0))
                    throw NewtonDivergence(
                        "newton_solve: converged to a nonpositive phase derivative");
            return res;
        }
    }
    throw NewtonDivergence("newton_solve: no convergence within " +
                           std::to_string(cfg.max_newton) + " iterations");
}

}  // namespace oscphase
