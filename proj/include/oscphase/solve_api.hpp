#pragma once

#include <cmath>

#include "phasefn.hpp"

namespace oscphase {

// Coefficients of a solution c1 sin(alpha)/sqrt(alpha') + c2 cos(alpha)/sqrt(alpha').
struct SolutionCoeffs {
    double c1 = 0.0;
    double c2 = 0.0;
};

struct BasisValues {
    double u, up, v, vp;
};

// u = sin(alpha)/sqrt(alpha'), v = cos(alpha)/sqrt(alpha') and their
// derivatives.  The Wronskian u v' - v u' is identically -1.
inline BasisValues basis_at(const PiecewisePhase& ph, double t) {
    double al = ph.alpha(t);
    double ap = ph.alpha_p(t);
    double app = ph.alpha_pp(t);
    double s = std::sin(al), c = std::cos(al);
    double rt = std::sqrt(ap);
    double w = app / (2.0 * ap * rt);  // alpha''/(2 (alpha')^{3/2})
    return {s / rt, c * rt - s * w, c / rt, -s * rt - c * w};
}

// Match y(t0) = y0, y'(t0) = yp0.  The system matrix has determinant -1
// (the Wronskian), so the fit always exists.
inline SolutionCoeffs fit_ivp(const PiecewisePhase& ph, double t0, double y0, double yp0) {
    if (!std::isfinite(t0) || !std::isfinite(y0) || !std::isfinite(yp0))
        throw NumericFailure("fit_ivp: non-finite data");
    BasisValues bv = basis_at(ph, t0);
    double det = bv.u * bv.vp - bv.v * bv.up;
    return {(y0 * bv.vp - bv.v * yp0) / det, (bv.u * yp0 - y0 * bv.up) / det};
}

// Match y(a) = ya, y(b) = yb over the full domain of the phase.
inline SolutionCoeffs fit_bvp(const PiecewisePhase& ph, double ya, double yb) {
    if (!std::isfinite(ya) || !std::isfinite(yb)) throw NumericFailure("fit_bvp: non-finite data");
    BasisValues ba = basis_at(ph, ph.a());
    BasisValues bb = basis_at(ph, ph.b());
    double det = ba.u * bb.v - ba.v * bb.u;
    double scale = std::max(std::abs(ba.u), std::abs(ba.v)) *
                   std::max(std::abs(bb.u), std::abs(bb.v));
    if (std::abs(det) < 1e-12 * scale)
        throw IllConditionedBC("fit_bvp: boundary points lie near conjugate zeros");
    return {(ya * bb.v - ba.v * yb) / det, (ba.u * yb - ya * bb.u) / det};
}

struct SolutionValue {
    double y, yp;
};

inline SolutionValue eval_solution(const PiecewisePhase& ph, const SolutionCoeffs& c, double t) {
    BasisValues bv = basis_at(ph, t);
    return {c.c1 * bv.u + c.c2 * bv.v, c.c1 * bv.up + c.c2 * bv.vp};
}

}  // namespace oscphase
