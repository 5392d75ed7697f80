#include "herglotz/lbfgs.hpp"

#include <cmath>
#include <deque>

namespace herglotz::lbfgs {

namespace {

using Eigen::VectorXd;

struct LinePoint {
    double alpha;
    double f;
    double slope;
};

// Cubic interpolation minimizer of a bracket; falls back to bisection when
// the cubic is degenerate or leaves the interval.
double interpolate(const LinePoint& a, const LinePoint& b) {
    double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    double disc = d1 * d1 - a.slope * b.slope;
    if (disc >= 0.0) {
        double d2 = std::sqrt(disc) * (b.alpha > a.alpha ? 1.0 : -1.0);
        double cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) /
                                    (b.slope - a.slope + 2.0 * d2);
        double lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
        double width = hi - lo;
        if (std::isfinite(cand) && cand > lo + 0.05 * width && cand < hi - 0.05 * width)
            return cand;
    }
    return 0.5 * (a.alpha + b.alpha);
}

struct LineSearch {
    const Objective& objective;
    const VectorXd& x;
    const VectorXd& dir;
    double f0;
    double slope0;
    const Options& opts;

    VectorXd x_trial;
    VectorXd g_trial;
    int evals = 0;

    LinePoint eval(double alpha) {
        x_trial = x + alpha * dir;
        double f = objective(x_trial, g_trial);
        ++evals;
        return {alpha, f, g_trial.dot(dir)};
    }

    bool wolfe(const LinePoint& p) const {
        return p.f <= f0 + opts.c1 * p.alpha * slope0 &&
               std::abs(p.slope) <= opts.c2 * std::abs(slope0);
    }

    // Nocedal-Wright bracketing plus zoom. Returns true with the accepted
    // point in (x_trial, g_trial, out).
    bool run(LinePoint& out) {
        LinePoint prev{0.0, f0, slope0};
        double alpha = 1.0;
        for (int i = 0; i < opts.max_linesearch; ++i) {
            LinePoint cur = eval(alpha);
            if (!std::isfinite(cur.f)) {
                alpha = 0.5 * (prev.alpha + alpha);
                continue;
            }
            if (cur.f > f0 + opts.c1 * alpha * slope0 || (i > 0 && cur.f >= prev.f))
                return zoom(prev, cur, out);
            if (std::abs(cur.slope) <= opts.c2 * std::abs(slope0)) {
                out = cur;
                return true;
            }
            if (cur.slope >= 0.0) return zoom(cur, prev, out);
            prev = cur;
            alpha = std::min(2.0 * alpha, 1e10);
        }
        return false;
    }

    bool zoom(LinePoint lo, LinePoint hi, LinePoint& out) {
        for (int i = 0; i < opts.max_linesearch; ++i) {
            double alpha = interpolate(lo, hi);
            if (!(std::abs(hi.alpha - lo.alpha) >
                  1e-14 * std::max(1.0, std::abs(lo.alpha))))
                break;
            LinePoint cur = eval(alpha);
            if (!std::isfinite(cur.f) || cur.f > f0 + opts.c1 * alpha * slope0 ||
                cur.f >= lo.f) {
                hi = cur;
                continue;
            }
            if (std::abs(cur.slope) <= opts.c2 * std::abs(slope0)) {
                out = cur;
                return true;
            }
            if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = cur;
        }
        // Accept a plain-decrease point if the curvature test never held;
        // the caller treats no-decrease as a line search failure.
        if (lo.alpha > 0.0 && lo.f < f0) {
            out = eval(lo.alpha);
            return true;
        }
        return false;
    }
};

}  // namespace

Result minimize(const Objective& objective, const VectorXd& x0, const Options& opts,
                const StopTest& stop) {
    Result res;
    res.x = x0;
    res.grad.resize(x0.size());
    res.f = objective(res.x, res.grad);
    res.f_history.push_back(res.f);

    if (stop(res.f, res.grad)) {
        res.status = Status::Converged;
        return res;
    }

    std::deque<VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    double gamma = 1.0;

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        // Two-loop recursion for the search direction.
        VectorXd q = res.grad;
        std::vector<double> alpha_coef(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha_coef[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha_coef[i] * y_hist[i];
        }
        q *= gamma;
        for (size_t i = 0; i < s_hist.size(); ++i) {
            double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha_coef[i] - beta) * s_hist[i];
        }
        VectorXd dir = -q;

        double slope = res.grad.dot(dir);
        if (!(slope < 0.0)) {  // not a descent direction: restart from steepest
            dir = -res.grad;
            slope = res.grad.dot(dir);
            s_hist.clear(); y_hist.clear(); rho_hist.clear();
            gamma = 1.0;
            if (!(slope < 0.0)) {
                res.status = Status::Converged;  // zero gradient
                return res;
            }
        }

        LineSearch ls{objective, res.x, dir, res.f, slope, opts, {}, {}, 0};
        LinePoint accepted{};
        if (!ls.run(accepted) || !(accepted.f < res.f)) {
            res.status = Status::LineSearchFailed;
            res.iterations = iter - 1;
            return res;
        }

        VectorXd x_new = ls.x_trial;
        VectorXd g_new = ls.g_trial;
        VectorXd s = x_new - res.x;
        VectorXd y = g_new - res.grad;
        double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            gamma = sy / y.squaredNorm();
        }

        res.x = std::move(x_new);
        res.grad = std::move(g_new);
        res.f = accepted.f;
        res.f_history.push_back(res.f);
        res.iterations = iter;

        if (stop(res.f, res.grad)) {
            res.status = Status::Converged;
            return res;
        }
    }
    res.status = Status::MaxIterations;
    return res;
}

}  // namespace herglotz::lbfgs
