#pragma once

#include <Eigen/LU>
#include <utility>

#include "chebyshev.hpp"
#include "errors.hpp"

namespace oscphase {

enum class EntrySide { left, right };

// Values of the modulus function m = 1/alpha' and its first two derivatives
// at the entry endpoint of an interval (left endpoint for IVPs, right
// endpoint for TVPs).
struct AppellIVPData {
    double m0;
    double mp0;
    double mpp0;
    EntrySide side = EntrySide::left;
};

// alpha''' forced by Kummer's equation at a point:
//   alpha''' = (4 w^2 q (alpha')^2 - 4 (alpha')^4 + 3 (alpha'')^2) / (2 alpha').
// qval_scaled must be omega^2 q(c); with plain q(c) the identity fails.
inline double alpha_third(double apval, double appval, double qval_scaled) {
    if (!(apval > 0.0)) throw DegeneratePhase("alpha_third: alpha' must be positive");
    double sq = apval * apval;
    return (4.0 * qval_scaled * sq - 4.0 * sq * sq + 3.0 * appval * appval) / (2.0 * apval);
}

// Entry data for m = 1/alpha' from the phase derivatives at the entry point.
inline AppellIVPData phase_to_m(double apval, double appval, double apppval,
                                EntrySide side = EntrySide::left) {
    if (!(apval > 0.0)) throw DegeneratePhase("phase_to_m: alpha' must be positive");
    double m0 = 1.0 / apval;
    double mp0 = -appval / (apval * apval);
    double mpp0 = 2.0 * appval * appval / (apval * apval * apval) - apppval / (apval * apval);
    return {m0, mp0, mpp0, side};
}

struct AppellSolution {
    Vec m;
    Vec mp;
};

namespace detail {

// Integral-equation discretization of m''' + 4 w^2 q m' + 2 w^2 q' m = 0
// about the anchor c (= a or b): with J the spectral antiderivative matrix
// anchored at c and sigma = m''',
//   (I + diag(4 w^2 q) J^2 + diag(2 w^2 q') J^3) sigma = y,
//   m  = m(c) + m'(c) tc + m''(c) tc^2/2 + J^3 sigma,
//   m' = m'(c) + m''(c) tc + J^2 sigma,         tc = t - c.
inline AppellSolution solve_appell(const ChebGrid& g, double a, double b, const Vec& q,
                                   double omega, const AppellIVPData& data) {
    const int k = g.size();
    if (q.size() != k) throw InvalidConfig("solve_appell: sample count != grid size");
    for (int i = 0; i < k; ++i)
        if (!(q[i] > 0.0))
            throw QNotPositive("solve_appell: coefficient must be positive at every node");

    const bool left = data.side == EntrySide::left;
    const double c = left ? a : b;
    const double half = 0.5 * (b - a);
    const double w2 = omega * omega;

    Vec qp = (2.0 / (b - a)) * (g.diff() * q);
    Mat j1 = half * (left ? g.integ() : g.right_integ());
    Mat j2 = j1 * j1;
    Mat j3 = j2 * j1;

    Vec tc = g.mapped_nodes(a, b);
    tc.array() -= c;

    Mat A = Mat::Identity(k, k);
    A += (4.0 * w2 * q).asDiagonal() * j2;
    A += (2.0 * w2 * qp).asDiagonal() * j3;

    Vec y = -4.0 * w2 * (data.mp0 * q + data.mpp0 * q.cwiseProduct(tc)) -
            2.0 * w2 *
                (data.m0 * qp + data.mp0 * qp.cwiseProduct(tc) +
                 0.5 * data.mpp0 * qp.cwiseProduct(tc).cwiseProduct(tc));

    Vec sigma = A.partialPivLu().solve(y);
    if (!sigma.allFinite()) throw SingularSystem("solve_appell: singular collocation system");

    AppellSolution sol;
    sol.m = Vec::Constant(k, data.m0) + data.mp0 * tc +
            0.5 * data.mpp0 * tc.cwiseProduct(tc) + j3 * sigma;
    sol.mp = Vec::Constant(k, data.mp0) + data.mpp0 * tc + j2 * sigma;
    for (int i = 0; i < k; ++i)
        if (!(sol.m[i] > 0.0))
            throw DegeneratePhase("solve_appell: modulus function not positive");
    return sol;
}

}  // namespace detail

inline AppellSolution solve_ivp(const ChebGrid& g, double a, double b, const Vec& q, double omega,
                                const AppellIVPData& data) {
    if (data.side != EntrySide::left)
        throw InvalidConfig("solve_ivp: entry data must be given at the left endpoint");
    return detail::solve_appell(g, a, b, q, omega, data);
}

inline AppellSolution solve_tvp(const ChebGrid& g, double a, double b, const Vec& q, double omega,
                                const AppellIVPData& data) {
    if (data.side != EntrySide::right)
        throw InvalidConfig("solve_tvp: entry data must be given at the right endpoint");
    return detail::solve_appell(g, a, b, q, omega, data);
}

// ap = 1/m pointwise, app = -ap o ap o mp.
inline std::pair<Vec, Vec> m_to_phase(const Vec& m, const Vec& mp) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
        if (!(m[i] > 0.0)) throw DegeneratePhase("m_to_phase: modulus function not positive");
    Vec ap = m.cwiseInverse();
    Vec app = -(ap.cwiseProduct(ap).cwiseProduct(mp));
    return {ap, app};
}

}  // namespace oscphase
