#pragma once

#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "chebyshev.hpp"
#include "coeffexpr.hpp"
#include "config.hpp"
#include "errors.hpp"

namespace oscphase {

inline constexpr double kEps0 = 2.220446049250313e-16;

// kappa = eps0 |t y'/y|, floored at eps0: the attainable relative accuracy
// when evaluating an oscillatory solution.
inline double condition_of_evaluation(double t, double y, double yp) {
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    return kEps0 * std::max(1.0, std::abs(t * yp / y));
}

struct LegendreValues {
    double P, Q, dP, dQ;
};

// Forward three-term recurrences for P_n and Q_n on (-1,1); derivatives via
// (1-t^2) y_n' = n (y_{n-1} - t y_n).  Both members are oscillatory there, so
// the forward direction is stable.
inline LegendreValues legendre_pq(int n, double t) {
    if (n < 0) throw InvalidConfig("legendre_pq: degree must be nonnegative");
    if (!(std::abs(t) < 1.0)) throw OutOfDomain("legendre_pq: requires |t| < 1");
    double s = (1.0 - t) * (1.0 + t);
    double q0 = std::atanh(t);
    if (n == 0) return {1.0, q0, 0.0, 1.0 / s};
    double pm = 1.0, pc = t;
    double qm = q0, qc = t * q0 - 1.0;
    for (int j = 2; j <= n; ++j) {
        double ca = (2.0 * j - 1.0) / j;
        double cb = (j - 1.0) / j;
        double pn = ca * t * pc - cb * pm;
        pm = pc;
        pc = pn;
        double qn = ca * t * qc - cb * qm;
        qm = qc;
        qc = qn;
    }
    double dp = n * (pm - t * pc) / s;
    double dq = n * (qm - t * qc) / s;
    return {pc, qc, dp, dq};
}

// Derivative of the nonoscillatory trigonometric phase function for the
// Legendre normal form:
//   alpha'(t) = 1 / ((1-t^2) ((pi/2) P_n^2 + (2/pi) Q_n^2)).
inline double legendre_alpha_exact(int n, double t) {
    LegendreValues lv = legendre_pq(n, t);
    double s = (1.0 - t) * (1.0 + t);
    double half_pi = 0.5 * std::numbers::pi;
    double two_over_pi = 2.0 / std::numbers::pi;
    return 1.0 / (s * (half_pi * lv.P * lv.P + two_over_pi * lv.Q * lv.Q));
}

// Gegenbauer C_n^alpha by the three-term recurrence
//   n C_n = 2 (n + alpha - 1) t C_{n-1} - (n + 2 alpha - 2) C_{n-2}.
inline double gegenbauer(int n, double alpha_order, double t) {
    if (!(alpha_order > -0.5) || alpha_order == 0.0)
        throw InvalidConfig("gegenbauer: requires order > -1/2 and order != 0");
    if (n < 0) throw InvalidConfig("gegenbauer: degree must be nonnegative");
    if (!(std::abs(t) <= 1.0)) throw OutOfDomain("gegenbauer: requires |t| <= 1");
    if (n == 0) return 1.0;
    double cm = 1.0;
    double cc = 2.0 * alpha_order * t;
    for (int j = 2; j <= n; ++j) {
        double cn = (2.0 * (j + alpha_order - 1.0) * t * cc - (j + 2.0 * alpha_order - 2.0) * cm) / j;
        cm = cc;
        cc = cn;
    }
    return cc;
}

// d/dt C_n^alpha = 2 alpha C_{n-1}^{alpha+1}.
inline double gegenbauer_derivative(int n, double alpha_order, double t) {
    if (n == 0) return 0.0;
    return 2.0 * alpha_order * gegenbauer(n - 1, alpha_order + 1.0, t);
}

// ---- standard adaptive spectral collocation reference solver --------------
//
// Solves y'' + omega^2 q y = 0 directly, marching left to right over an
// adaptively refined interval list.  Per interval, sigma = y'' solves
//   (I + diag(omega^2 q) J^2) sigma = -omega^2 q o (yv + ypv tc),
// with J the left-anchored spectral antiderivative, then
//   y = yv + ypv tc + J^2 sigma,   y' = ypv + J sigma.
// Cost grows with omega (roughly O(omega) intervals), unlike the phase
// method; that contrast is the point of this solver.

struct IvpBC {
    double y0, yp0;  // values at the left endpoint
};
struct BvpBC {
    double ya, yb;
};
using ReferenceBC = std::variant<IvpBC, BvpBC>;

class ReferenceSolution {
public:
    struct Piece {
        double a, b;
        ChebExpansion y, yp;
    };
    struct Part {
        double coef = 0.0;
        std::vector<Piece> pieces;
    };

    double eval(double t) const { return combine(t, false); }
    double eval_deriv(double t) const { return combine(t, true); }
    std::size_t interval_count() const {
        std::size_t n = 0;
        for (const Part& p : parts_) n += p.pieces.size();
        return n;
    }
    const std::vector<Part>& parts() const { return parts_; }

    std::vector<Part> parts_;

private:
    double combine(double t, bool deriv) const {
        double acc = 0.0;
        for (const Part& p : parts_) {
            const Piece& pc = locate(p.pieces, t);
            acc += p.coef * eval_expansion(deriv ? pc.yp : pc.y, t);
        }
        return acc;
    }
    static const Piece& locate(const std::vector<Piece>& pieces, double t) {
        if (pieces.empty() || !(t >= pieces.front().a && t <= pieces.back().b))
            throw OutOfDomain("reference solution evaluated outside its domain");
        std::size_t lo = 0, hi = pieces.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (t <= pieces[mid].b)
                hi = mid;
            else
                lo = mid + 1;
        }
        return pieces[lo];
    }
};

namespace detail {

inline std::vector<ReferenceSolution::Piece> reference_march(const ChebGrid& g,
                                                             const CoefficientSpec& spec,
                                                             double omega, double a, double b,
                                                             double y0, double yp0, double tol,
                                                             int max_depth) {
    const int k = g.size();
    const double w2 = omega * omega;
    struct Item {
        double a, b;
        int depth;
    };
    std::vector<Item> todo{{a, b, 0}};
    std::vector<ReferenceSolution::Piece> out;
    double yv = y0, ypv = yp0;
    while (!todo.empty()) {
        Item cur = todo.back();
        todo.pop_back();
        auto split = [&] {
            if (cur.depth >= max_depth)
                throw NonConvergentRefinement("reference solver: refinement exceeded max depth");
            double mid = 0.5 * (cur.a + cur.b);
            todo.push_back({mid, cur.b, cur.depth + 1});
            todo.push_back({cur.a, mid, cur.depth + 1});
        };

        Vec t = g.mapped_nodes(cur.a, cur.b);
        Vec q(k);
        for (int i = 0; i < k; ++i) q[i] = eval_q(spec, t[i], omega);
        // resolve the coefficient and keep the local phase small enough for
        // a k-point grid before trusting the local solve
        double qmax = q.maxCoeff();
        bool resolved = fit_ratio(g, q) < tol &&
                        omega * std::sqrt(std::max(qmax, 0.0)) * (cur.b - cur.a) <= 5.0;
        if (!resolved) {
            split();
            continue;
        }

        double half = 0.5 * (cur.b - cur.a);
        Mat j1 = half * g.integ();
        Mat j2 = j1 * j1;
        Vec tc = t;
        tc.array() -= cur.a;
        Mat A = Mat::Identity(k, k);
        A += (w2 * q).asDiagonal() * j2;
        Vec rhs = -(w2 * q.cwiseProduct(Vec::Constant(k, yv) + ypv * tc));
        Vec sigma = A.partialPivLu().solve(rhs);
        if (!sigma.allFinite())
            throw SingularSystem("reference solver: singular collocation system");
        Vec y = Vec::Constant(k, yv) + ypv * tc + j2 * sigma;
        Vec yp = Vec::Constant(k, ypv) + j1 * sigma;

        if (fit_ratio(g, y) < tol) {
            ReferenceSolution::Piece piece{cur.a, cur.b, vals_to_coefs(g, y, cur.a, cur.b),
                                           vals_to_coefs(g, yp, cur.a, cur.b)};
            out.push_back(std::move(piece));
            yv = y[k - 1];
            ypv = yp[k - 1];
        } else {
            split();
        }
    }
    return out;
}

}  // namespace detail

inline ReferenceSolution spectral_reference_solve(const CoefficientSpec& spec, double omega,
                                                  double a, double b, const ReferenceBC& bc,
                                                  double tol = 1.0e-12) {
    if (!(b > a)) throw InvalidConfig("spectral_reference_solve: requires b > a");
    if (!(tol > 0.0 && tol < 1.0))
        throw InvalidConfig("spectral_reference_solve: tol must lie in (0,1)");
    const int max_depth = 60;
    static const ChebGrid g(16);  // same order and fit test as the phase solver

    ReferenceSolution sol;
    if (const IvpBC* ivp = std::get_if<IvpBC>(&bc)) {
        ReferenceSolution::Part part;
        part.coef = 1.0;
        part.pieces = detail::reference_march(g, spec, omega, a, b, ivp->y0, ivp->yp0, tol, max_depth);
        sol.parts_.push_back(std::move(part));
        return sol;
    }
    const BvpBC& bvp = std::get<BvpBC>(bc);
    // particular march fixing y(a), homogeneous march fixing the slope; match
    // the right boundary with a scalar correction
    ReferenceSolution::Part yp_part, yh_part;
    yp_part.pieces = detail::reference_march(g, spec, omega, a, b, bvp.ya, 0.0, tol, max_depth);
    yh_part.pieces = detail::reference_march(g, spec, omega, a, b, 0.0, 1.0, tol, max_depth);
    double pb = eval_expansion(yp_part.pieces.back().y, b);
    double hb = eval_expansion(yh_part.pieces.back().y, b);
    double hscale = 0.0;
    for (const auto& pc : yh_part.pieces)
        hscale = std::max(hscale, pc.y.coefs.cwiseAbs().maxCoeff());
    if (std::abs(hb) < 1e-12 * std::max(1.0, hscale))
        throw IllConditionedBC("spectral_reference_solve: right boundary near a conjugate zero");
    yp_part.coef = 1.0;
    yh_part.coef = (bvp.yb - pb) / hb;
    sol.parts_.push_back(std::move(yp_part));
    sol.parts_.push_back(std::move(yh_part));
    return sol;
}

}  // namespace oscphase
