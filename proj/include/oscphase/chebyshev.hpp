#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace oscphase {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;

// Nodes of the k-point extremal grid on [-1,1], ascending:
// t_i = cos(pi (k-i)/(k-1)), i = 1..k.  Symmetry is enforced exactly.
inline Vec extremal_nodes(int k) {
    if (k < 2) throw InvalidConfig("extremal_nodes: need at least 2 points");
    Vec x(k);
    for (int i = 0; i < k; ++i)
        x[i] = -std::cos(std::numbers::pi * i / (k - 1));
    for (int i = 0; 2 * i < k; ++i) {
        double v = 0.5 * (x[i] - x[k - 1 - i]);
        x[i] = v;
        x[k - 1 - i] = -v;
    }
    x[0] = -1.0;
    x[k - 1] = 1.0;
    return x;
}

// Spectral machinery of a k-point extremal grid on the reference interval
// [-1,1]: differentiation, left-anchored integration and values->coefficients
// matrices.  All three depend only on k; an interval [a,b] enters through the
// affine factors 2/(b-a) (differentiation) and (b-a)/2 (integration).
// Immutable after construction and safe to share between threads.
class ChebGrid {
public:
    explicit ChebGrid(int k) : k_(k) {
        if (k < 4) throw InvalidConfig("ChebGrid: requires k >= 4");
        nodes_ = extremal_nodes(k);
        const int n = k - 1;

        // Barycentric differentiation; the negative-sum diagonal makes the
        // matrix annihilate constants exactly.
        Vec w(k);
        for (int i = 0; i < k; ++i) {
            w[i] = (i % 2) ? -1.0 : 1.0;
            if (i == 0 || i == n) w[i] *= 0.5;
        }
        diff_.setZero(k, k);
        for (int i = 0; i < k; ++i) {
            double rowsum = 0.0;
            for (int j = 0; j < k; ++j) {
                if (i == j) continue;
                double d = (w[j] / w[i]) / (nodes_[i] - nodes_[j]);
                diff_(i, j) = d;
                rowsum += d;
            }
            diff_(i, i) = -rowsum;
        }

        // tval(i,j) = T_j(x_i); one extra column for the antiderivative below.
        Mat tval(k, k + 1);
        for (int i = 0; i < k; ++i) {
            double theta = std::numbers::pi * double(n - i) / n;
            for (int j = 0; j <= k; ++j) tval(i, j) = std::cos(j * theta);
        }

        // values -> Chebyshev coefficients via discrete cosine orthogonality
        // on the extremal grid (end terms halved, a_0 and a_{k-1} halved again).
        vals2coefs_.setZero(k, k);
        for (int j = 0; j < k; ++j) {
            double cj = (j == 0 || j == n) ? 2.0 : 1.0;
            for (int i = 0; i < k; ++i) {
                double ci = (i == 0 || i == n) ? 2.0 : 1.0;
                vals2coefs_(j, i) = 2.0 / (n * cj * ci) * tval(i, j);
            }
        }

        // Integration: antidifferentiate in coefficient space
        //   int T_0 = T_1,  int T_n = T_{n+1}/(2(n+1)) - T_{n-1}/(2(n-1)),
        // fix the constant so the antiderivative vanishes at -1, and evaluate
        // back at the nodes.  The exact degree-k antiderivative is kept (k+1
        // coefficients), so integ is exact for polynomial input of degree < k.
        Mat anti = Mat::Zero(k + 1, k);
        for (int j = 1; j <= k; ++j) {
            double chat = (j == 1) ? 2.0 : 1.0;
            anti(j, j - 1) += chat / (2.0 * j);
            if (j + 1 <= k - 1) anti(j, j + 1) -= 1.0 / (2.0 * j);
        }
        for (int j = 1; j <= k; ++j) {
            double sgn = (j % 2) ? -1.0 : 1.0;  // T_j(-1)
            anti.row(0) -= sgn * anti.row(j);
        }
        integ_ = tval * anti * vals2coefs_;
        integ_.row(0).setZero();  // exact left anchor
    }

    int size() const { return k_; }
    const Vec& nodes() const { return nodes_; }
    const Mat& diff() const { return diff_; }
    const Mat& integ() const { return integ_; }
    const Mat& vals_to_coefs_matrix() const { return vals2coefs_; }

    // Integration matrix anchored at the right endpoint: values of p to
    // values of int_{+1}^x p.  Derived from integ by subtracting its last row.
    Mat right_integ() const {
        Mat r = integ_;
        r.rowwise() -= integ_.row(k_ - 1);
        r.row(k_ - 1).setZero();
        return r;
    }

    // Nodes mapped to [a,b]; the endpoints map exactly.
    Vec mapped_nodes(double a, double b) const {
        Vec t(k_);
        for (int i = 0; i < k_; ++i)
            t[i] = 0.5 * (a * (1.0 - nodes_[i]) + b * (1.0 + nodes_[i]));
        return t;
    }

private:
    int k_;
    Vec nodes_;
    Mat diff_, integ_, vals2coefs_;
};

inline ChebGrid make_grid(int k) { return ChebGrid(k); }

// A function on [a,b] represented by k Chebyshev coefficients.
struct ChebExpansion {
    double a = -1.0;
    double b = 1.0;
    Vec coefs;
};

inline double clenshaw(const Vec& c, double x) {
    double b1 = 0.0, b2 = 0.0;
    for (Eigen::Index j = c.size() - 1; j >= 1; --j) {
        double t = c[j] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = t;
    }
    return c[0] + x * b1 - b2;
}

inline ChebExpansion vals_to_coefs(const ChebGrid& g, const Vec& vals, double a, double b) {
    if (!(b > a)) throw InvalidConfig("vals_to_coefs: requires b > a");
    if (vals.size() != g.size()) throw InvalidConfig("vals_to_coefs: sample count != grid size");
    if (!vals.allFinite()) throw NumericFailure("vals_to_coefs: non-finite samples");
    return ChebExpansion{a, b, g.vals_to_coefs_matrix() * vals};
}

inline double eval_expansion(const ChebExpansion& e, double t) {
    if (!(t >= e.a && t <= e.b))
        throw OutOfDomain("eval_expansion: t = " + std::to_string(t) + " outside [" +
                          std::to_string(e.a) + ", " + std::to_string(e.b) + "]");
    double x = (2.0 * t - e.a - e.b) / (e.b - e.a);
    return clenshaw(e.coefs, std::clamp(x, -1.0, 1.0));
}

// Goodness of fit: ratio of the largest of the top two coefficients to the
// largest coefficient overall.  "Well fit at eps" means ratio < eps; an
// all-zero sample vector counts as well fit.
inline double fit_ratio(const ChebGrid& g, const Vec& vals) {
    Vec c = g.vals_to_coefs_matrix() * vals;
    const int k = g.size();
    double den = c.cwiseAbs().maxCoeff();
    if (den == 0.0) return 0.0;
    return std::max(std::abs(c[k - 2]), std::abs(c[k - 1])) / den;
}

}  // namespace oscphase
