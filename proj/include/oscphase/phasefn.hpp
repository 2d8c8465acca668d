#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "appell.hpp"
#include "chebyshev.hpp"
#include "coeffexpr.hpp"
#include "config.hpp"
#include "riccati.hpp"

namespace oscphase {

enum class Provenance { riccati, appell_ivp, appell_tvp, unspecified };

// Grids are interval independent and read-only; share one instance per k.
inline const ChebGrid& shared_grid(int k) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<const ChebGrid>> cache;
    std::scoped_lock lock(mu);
    auto& slot = cache[k];
    if (!slot) slot = std::make_unique<const ChebGrid>(k);
    return *slot;
}

struct PhaseInterval {
    double a = 0.0, b = 0.0;
    Provenance prov = Provenance::unspecified;
    Vec ap, app, alpha;  // node samples
    ChebExpansion alpha_c, alphap_c, alphapp_c;
};

// The piecewise Chebyshev representation of the slowly varying trigonometric
// phase function: contiguous intervals tiling [a,b], each carrying alpha,
// alpha' and alpha'' as degree-(k-1) expansions, normalized by alpha(a) = 0.
// Immutable once built; evaluation is safe from any number of threads.
class PiecewisePhase {
public:
    PiecewisePhase(double omega, int k, std::vector<PhaseInterval> intervals)
        : omega_(omega), k_(k), intervals_(std::move(intervals)) {
        if (intervals_.empty()) throw InvalidConfig("PiecewisePhase: no intervals");
        for (std::size_t j = 0; j < intervals_.size(); ++j) {
            const auto& iv = intervals_[j];
            if (!(iv.b > iv.a)) throw InvalidConfig("PiecewisePhase: empty interval");
            if (j > 0 && intervals_[j - 1].b != iv.a)
                throw InvalidConfig("PiecewisePhase: intervals do not tile the domain");
            for (Eigen::Index i = 0; i < iv.ap.size(); ++i)
                if (!(iv.ap[i] > 0.0))
                    throw DegeneratePhase("PiecewisePhase: alpha' not positive");
        }
    }

    double a() const { return intervals_.front().a; }
    double b() const { return intervals_.back().b; }
    double omega() const { return omega_; }
    int order() const { return k_; }
    const std::vector<PhaseInterval>& intervals() const { return intervals_; }

    // Index of the interval containing t; a shared endpoint belongs to the
    // left interval.
    std::size_t find_interval(double t) const {
        if (!(t >= a() && t <= b()))
            throw OutOfDomain("phase evaluation at t = " + std::to_string(t) +
                              " outside [" + std::to_string(a()) + ", " + std::to_string(b()) + "]");
        std::size_t lo = 0, hi = intervals_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (t <= intervals_[mid].b)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    double alpha(double t) const { return eval_expansion(intervals_[find_interval(t)].alpha_c, t); }
    double alpha_p(double t) const { return eval_expansion(intervals_[find_interval(t)].alphap_c, t); }
    double alpha_pp(double t) const { return eval_expansion(intervals_[find_interval(t)].alphapp_c, t); }

private:
    double omega_;
    int k_;
    std::vector<PhaseInterval> intervals_;
};

enum class PhaseComponent { alpha, alpha_p, alpha_pp };

inline double eval_phase(const PiecewisePhase& ph, double t, PhaseComponent which) {
    switch (which) {
        case PhaseComponent::alpha: return ph.alpha(t);
        case PhaseComponent::alpha_p: return ph.alpha_p(t);
        case PhaseComponent::alpha_pp: return ph.alpha_pp(t);
    }
    return 0.0;
}

// Working state for the sweep stages.
struct StageInterval {
    double a = 0.0, b = 0.0;
    int depth = 0;
    bool solved = false;
    Provenance prov = Provenance::unspecified;
    Vec q;  // coefficient samples at the mapped nodes
    Vec ap, app;
};

namespace detail {

inline Vec sample_coefficient(const ChebGrid& g, const CoefficientSpec& spec, double omega,
                              double a, double b) {
    Vec t = g.mapped_nodes(a, b);
    Vec q(g.size());
    for (int i = 0; i < g.size(); ++i) q[i] = eval_q(spec, t[i], omega);
    return q;
}

inline void require_positive(const Vec& q, double a, double b) {
    for (Eigen::Index i = 0; i < q.size(); ++i)
        if (!(q[i] > 0.0))
            throw QNotPositive("coefficient not positive at a node of [" + std::to_string(a) +
                               ", " + std::to_string(b) + "]");
}

// Push both halves of cur; the half that must be processed next goes last
// (the work list is consumed from the back).
inline void split_interval(const StageInterval& cur, std::vector<StageInterval>& todo,
                           const SolverConfig& cfg, bool left_next) {
    if (cur.depth >= cfg.max_depth)
        throw NonConvergentRefinement("refinement exceeded max_depth near [" +
                                      std::to_string(cur.a) + ", " + std::to_string(cur.b) + "]");
    double mid = 0.5 * (cur.a + cur.b);
    StageInterval lo{cur.a, mid, cur.depth + 1};
    StageInterval hi{mid, cur.b, cur.depth + 1};
    if (left_next) {
        todo.push_back(std::move(hi));
        todo.push_back(std::move(lo));
    } else {
        todo.push_back(std::move(lo));
        todo.push_back(std::move(hi));
    }
}

}  // namespace detail

// Stage 1: adaptive bisection until the coefficient is well fit on every
// interval.  Accepted nodes must carry a strictly positive coefficient.
inline std::vector<StageInterval> discretize_coefficient(const ChebGrid& g,
                                                         const CoefficientSpec& spec, double omega,
                                                         double a, double b,
                                                         const SolverConfig& cfg) {
    if (!(b > a)) throw InvalidConfig("discretize_coefficient: requires b > a");
    std::vector<StageInterval> todo;
    todo.push_back(StageInterval{a, b, 0});
    std::vector<StageInterval> out;
    while (!todo.empty()) {
        StageInterval cur = std::move(todo.back());
        todo.pop_back();
        cur.q = detail::sample_coefficient(g, spec, omega, cur.a, cur.b);
        if (fit_ratio(g, cur.q) < cfg.eps) {
            detail::require_positive(cur.q, cur.a, cur.b);
            out.push_back(std::move(cur));
        } else {
            detail::split_interval(cur, todo, cfg, /*left_next=*/true);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const StageInterval& x, const StageInterval& y) { return x.a < y.a; });
    return out;
}

// Stage 2: left-to-right sweep.  High-frequency intervals (gamma > thresh)
// are solved via the Riccati Newton iteration; low-frequency intervals with a
// solved left neighbor are filled by an Appell initial value problem seeded
// through Kummer's equation.  Both paths fit-test alpha' and bisect on
// failure (left half first).  Low-frequency intervals with no solved left
// neighbor are passed through unsolved for stage 3.
inline std::vector<StageInterval> sweep_left_right(const ChebGrid& g,
                                                   std::vector<StageInterval> initial,
                                                   const CoefficientSpec& spec, double omega,
                                                   const SolverConfig& cfg) {
    const int k = g.size();
    std::vector<StageInterval> todo(initial.rbegin(), initial.rend());
    std::vector<StageInterval> out;
    while (!todo.empty()) {
        StageInterval cur = std::move(todo.back());
        todo.pop_back();
        if (cur.q.size() != k)
            cur.q = detail::sample_coefficient(g, spec, omega, cur.a, cur.b);
        detail::require_positive(cur.q, cur.a, cur.b);

        double gam = gamma(cur.q.minCoeff(), omega, cur.a, cur.b);
        bool have_left = !out.empty() && out.back().solved && out.back().b == cur.a;

        if (gam > cfg.thresh) {
            RiccatiResult rr = newton_solve(g, cur.a, cur.b, cur.q, omega, cfg);
            cur.ap = rr.r.imag();
            cur.app = -2.0 * cur.ap.cwiseProduct(Vec(rr.r.real()));
            if (fit_ratio(g, cur.ap) < cfg.eps) {
                cur.solved = true;
                cur.prov = Provenance::riccati;
                out.push_back(std::move(cur));
            } else {
                detail::split_interval(cur, todo, cfg, /*left_next=*/true);
            }
        } else if (have_left) {
            const StageInterval& left = out.back();
            double apval = left.ap[k - 1];
            double appval = left.app[k - 1];
            double qs = omega * omega * cur.q[0];
            bool ok = true;
            try {
                double apppval = alpha_third(apval, appval, qs);
                AppellIVPData data = phase_to_m(apval, appval, apppval, EntrySide::left);
                AppellSolution sol = solve_ivp(g, cur.a, cur.b, cur.q, omega, data);
                auto [ap, app] = m_to_phase(sol.m, sol.mp);
                cur.ap = std::move(ap);
                cur.app = std::move(app);
            } catch (const DegeneratePhase&) {
                ok = false;  // reciprocal would be meaningless; refine instead
            }
            if (ok && fit_ratio(g, cur.ap) < cfg.eps) {
                cur.solved = true;
                cur.prov = Provenance::appell_ivp;
                out.push_back(std::move(cur));
            } else {
                detail::split_interval(cur, todo, cfg, /*left_next=*/true);
            }
        } else {
            out.push_back(std::move(cur));  // left for the right-to-left sweep
        }
    }
    return out;
}

// Stage 3: right-to-left sweep filling the remaining intervals by terminal
// value problems for Appell's equation, terminal data taken from the left
// endpoint of the solved neighbor on the right.  Bisection pushes the right
// half first.
inline std::vector<StageInterval> sweep_right_left(const ChebGrid& g,
                                                   std::vector<StageInterval> state,
                                                   const CoefficientSpec& spec, double omega,
                                                   const SolverConfig& cfg) {
    const int k = g.size();
    std::size_t first_solved = 0;
    while (first_solved < state.size() && !state[first_solved].solved) ++first_solved;
    if (first_solved == state.size())
        throw NoHighFrequencyInterval(
            "sweep_right_left: no interval was solved in the earlier stages");
    if (first_solved == 0) return state;

    std::vector<StageInterval> todo(state.begin(), state.begin() + first_solved);
    std::vector<StageInterval> done(state.begin() + first_solved, state.end());
    std::vector<StageInterval> filled;  // accepted right-to-left

    while (!todo.empty()) {
        StageInterval cur = std::move(todo.back());
        todo.pop_back();
        if (cur.q.size() != k)
            cur.q = detail::sample_coefficient(g, spec, omega, cur.a, cur.b);
        detail::require_positive(cur.q, cur.a, cur.b);

        const StageInterval& anchor = filled.empty() ? done.front() : filled.back();
        double apval = anchor.ap[0];
        double appval = anchor.app[0];
        double qs = omega * omega * anchor.q[0];
        bool ok = true;
        try {
            double apppval = alpha_third(apval, appval, qs);
            AppellIVPData data = phase_to_m(apval, appval, apppval, EntrySide::right);
            AppellSolution sol = solve_tvp(g, cur.a, cur.b, cur.q, omega, data);
            auto [ap, app] = m_to_phase(sol.m, sol.mp);
            cur.ap = std::move(ap);
            cur.app = std::move(app);
        } catch (const DegeneratePhase&) {
            ok = false;
        }
        if (ok && fit_ratio(g, cur.ap) < cfg.eps) {
            cur.solved = true;
            cur.prov = Provenance::appell_tvp;
            filled.push_back(std::move(cur));
        } else {
            detail::split_interval(cur, todo, cfg, /*left_next=*/false);
        }
    }

    std::vector<StageInterval> out(filled.rbegin(), filled.rend());
    out.insert(out.end(), std::make_move_iterator(done.begin()), std::make_move_iterator(done.end()));
    return out;
}

// Stage 4: spectral integration of alpha' with a running offset, alpha(a) = 0.
inline PiecewisePhase integrate_phase(const ChebGrid& g, const std::vector<StageInterval>& state,
                                      double omega, const SolverConfig& cfg) {
    (void)cfg;
    const int k = g.size();
    double aval = 0.0;
    std::vector<PhaseInterval> out;
    out.reserve(state.size());
    for (const StageInterval& s : state) {
        if (!s.solved || s.ap.size() != k)
            throw InvalidConfig("integrate_phase: interval without alpha' samples");
        double half = 0.5 * (s.b - s.a);
        Vec alpha = Vec::Constant(k, aval) + half * (g.integ() * s.ap);
        aval = alpha[k - 1];
        PhaseInterval p;
        p.a = s.a;
        p.b = s.b;
        p.prov = s.prov;
        p.ap = s.ap;
        p.app = s.app;
        p.alpha = alpha;
        p.alpha_c = vals_to_coefs(g, alpha, s.a, s.b);
        p.alphap_c = vals_to_coefs(g, s.ap, s.a, s.b);
        p.alphapp_c = vals_to_coefs(g, s.app, s.a, s.b);
        out.push_back(std::move(p));
    }
    return PiecewisePhase(omega, k, std::move(out));
}

// The full four-stage construction.
inline PiecewisePhase build_phase(const CoefficientSpec& spec, double omega, double a, double b,
                                  const SolverConfig& cfg = {}) {
    cfg.validate();
    if (!(b > a)) throw InvalidConfig("build_phase: requires b > a");
    if (!(omega > 0.0)) throw InvalidConfig("build_phase: requires omega > 0");
    const ChebGrid& g = shared_grid(cfg.k);
    auto initial = discretize_coefficient(g, spec, omega, a, b, cfg);
    auto swept = sweep_left_right(g, std::move(initial), spec, omega, cfg);
    bool any_solved = std::any_of(swept.begin(), swept.end(),
                                  [](const StageInterval& s) { return s.solved; });
    if (!any_solved)
        throw NoHighFrequencyInterval("build_phase: no discretization interval in the "
                                      "high-frequency regime");
    auto full = sweep_right_left(g, std::move(swept), spec, omega, cfg);
    return integrate_phase(g, full, omega, cfg);
}

// ---- serialization: the "OSCPHASE 1" text format -------------------------
//
//   OSCPHASE 1
//   <k> <m> <omega>
//   then per interval: "<a_j> <b_j>" followed by three lines of k
//   coefficients (alpha, alpha', alpha''), 17 significant digits throughout.

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_phase(std::ostream& os, const PiecewisePhase& ph) {
    os << "OSCPHASE 1\n";
    os << ph.order() << ' ' << ph.intervals().size() << ' ' << detail::fmt17(ph.omega()) << '\n';
    for (const PhaseInterval& iv : ph.intervals()) {
        os << detail::fmt17(iv.a) << ' ' << detail::fmt17(iv.b) << '\n';
        for (const ChebExpansion* e : {&iv.alpha_c, &iv.alphap_c, &iv.alphapp_c}) {
            for (Eigen::Index i = 0; i < e->coefs.size(); ++i) {
                if (i) os << ' ';
                os << detail::fmt17(e->coefs[i]);
            }
            os << '\n';
        }
    }
}

inline PiecewisePhase read_phase(std::istream& is) {
    long lineno = 0;
    std::string line;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(is, line)) throw FormatError("unexpected end of file", lineno + 1);
        ++lineno;
        return line;
    };

    if (next_line() != "OSCPHASE 1") throw FormatError("unrecognized header or version", lineno);

    int k = 0;
    long m = 0;
    double omega = 0.0;
    {
        std::istringstream ss(next_line());
        std::string extra;
        if (!(ss >> k >> m >> omega) || (ss >> extra))
            throw FormatError("expected '<k> <m> <omega>'", lineno);
        if (k < 4) throw FormatError("k must be >= 4", lineno);
        if (m < 1) throw FormatError("interval count must be >= 1", lineno);
        if (!std::isfinite(omega)) throw FormatError("omega not finite", lineno);
    }

    const ChebGrid& g = shared_grid(k);
    std::vector<PhaseInterval> intervals;
    intervals.reserve(std::size_t(m));
    double prev_b = 0.0;
    for (long j = 0; j < m; ++j) {
        PhaseInterval iv;
        {
            std::istringstream ss(next_line());
            std::string extra;
            if (!(ss >> iv.a >> iv.b) || (ss >> extra))
                throw FormatError("expected '<a> <b>'", lineno);
        }
        if (!(iv.b > iv.a)) throw FormatError("interval endpoints not increasing", lineno);
        if (j > 0 && iv.a != prev_b) throw FormatError("intervals do not tile the domain", lineno);
        prev_b = iv.b;

        ChebExpansion* slots[3] = {&iv.alpha_c, &iv.alphap_c, &iv.alphapp_c};
        for (ChebExpansion* e : slots) {
            std::istringstream ss(next_line());
            Vec c(k);
            for (int i = 0; i < k; ++i)
                if (!(ss >> c[i])) throw FormatError("expected " + std::to_string(k) +
                                                     " coefficients", lineno);
            std::string extra;
            if (ss >> extra) throw FormatError("trailing data after coefficients", lineno);
            if (!c.allFinite()) throw FormatError("non-finite coefficient", lineno);
            *e = ChebExpansion{iv.a, iv.b, std::move(c)};
        }

        Vec t = g.mapped_nodes(iv.a, iv.b);
        iv.alpha.resize(k);
        iv.ap.resize(k);
        iv.app.resize(k);
        for (int i = 0; i < k; ++i) {
            iv.alpha[i] = eval_expansion(iv.alpha_c, t[i]);
            iv.ap[i] = eval_expansion(iv.alphap_c, t[i]);
            iv.app[i] = eval_expansion(iv.alphapp_c, t[i]);
        }
        for (int i = 0; i < k; ++i)
            if (!(iv.ap[i] > 0.0)) throw FormatError("alpha' not positive at a node", lineno);
        intervals.push_back(std::move(iv));
    }

    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            throw FormatError("trailing data after the last interval", lineno);
    }
    return PiecewisePhase(omega, k, std::move(intervals));
}

}  // namespace oscphase
