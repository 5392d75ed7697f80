#include "herglotz/caratheodory.hpp"

#include <cmath>
#include <sstream>

#include "herglotz/io.hpp"

namespace herglotz {

Vector DiscretePath::node(int k) const {
    if (k <= 0) return x0;
    if (k >= cells()) return x1;
    return nodes[k - 1];
}

Vector DiscretePath::velocity(int cell) const {
    return (node(cell + 1) - node(cell)) / h();
}

Vector DiscretePath::position(double s) const {
    double hh = h();
    int cell = std::clamp(static_cast<int>(std::floor(s / hh)), 0, cells() - 1);
    double local = s - cell * hh;
    return node(cell) + (local / hh) * (node(cell + 1) - node(cell));
}

double DiscretePath::length() const {
    double total = 0.0;
    for (int k = 0; k < cells(); ++k) total += (node(k + 1) - node(k)).norm();
    return total;
}

void DiscretePath::validate() const {
    if (!(t_final > 0.0)) throw Error("path: t_final must be positive");
    if (cells() < 2) throw Error("path: at least 2 cells required");
    if (x0.size() == 0 || x0.size() != x1.size()) throw Error("path: endpoint dimension mismatch");
    for (const auto& n : nodes)
        if (n.size() != x0.size()) throw Error("path: node dimension mismatch");
    if (!x0.allFinite() || !x1.allFinite()) throw NonFinite("path: non-finite endpoint");
    for (const auto& n : nodes)
        if (!n.allFinite()) throw NonFinite("path: non-finite node");
}

DiscretePath DiscretePath::straight(const Vector& x0, const Vector& x1, double t, int N) {
    DiscretePath p;
    p.t_final = t;
    p.x0 = x0;
    p.x1 = x1;
    p.nodes.reserve(N - 1);
    for (int k = 1; k < N; ++k)
        p.nodes.push_back(x0 + (static_cast<double>(k) / N) * (x1 - x0));
    p.validate();
    return p;
}

DiscretePath resample(const DiscretePath& path, int N) {
    DiscretePath out;
    out.t_final = path.t_final;
    out.x0 = path.x0;
    out.x1 = path.x1;
    out.nodes.reserve(N - 1);
    for (int k = 1; k < N; ++k)
        out.nodes.push_back(path.position(path.t_final * k / N));
    out.validate();
    return out;
}

namespace {

// One RK4 pass over a cell with constant velocity v, position x(s) = a + (s-s0) v.
double rk4_cell(const LagrangianModel& lag, const Vector& a, const Vector& v, double s0,
                double h, double u_in, int substeps) {
    double u = u_in;
    double dt = h / substeps;
    auto f = [&](double local_s, double uu) {
        double val = lag.eval(a + local_s * v, uu, v);
        if (!std::isfinite(val)) throw NonFinite("caratheodory: L not finite along path");
        return val;
    };
    for (int i = 0; i < substeps; ++i) {
        double s = i * dt;
        double k1 = f(s, u);
        double k2 = f(s + 0.5 * dt, u + 0.5 * dt * k1);
        double k3 = f(s + 0.5 * dt, u + 0.5 * dt * k2);
        double k4 = f(s + dt, u + dt * k3);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    (void)s0;
    return u;
}

}  // namespace

CaratheodoryTrace solve(const LagrangianModel& lag, const DiscretePath& path, double u0,
                        const SolveOptions& opts) {
    path.validate();
    const int N = path.cells();
    const double h = path.h();

    CaratheodoryTrace trace;
    trace.u.resize(N + 1);
    trace.u0 = u0;
    trace.t_final = path.t_final;
    trace.u[0] = u0;

    double u = u0;
    for (int k = 0; k < N; ++k) {
        Vector a = path.node(k);
        Vector v = path.velocity(k);
        int m = opts.min_substeps;
        while (true) {
            double coarse = rk4_cell(lag, a, v, k * h, h, u, m);
            double fine = rk4_cell(lag, a, v, k * h, h, u, 2 * m);
            double est = std::abs(coarse - fine) / 15.0;  // order-4 Richardson
            if (est <= opts.rel_tol * (1.0 + std::abs(fine))) {
                u = fine;
                trace.steps_accepted += 3L * m;
                trace.max_step_error = std::max(trace.max_step_error, est);
                break;
            }
            trace.steps_rejected += 3L * m;
            m *= 2;
            if (m > opts.max_substeps)
                throw NonConvergence("caratheodory: substep limit reached");
        }
        trace.u[k + 1] = u;
    }
    trace.action = trace.u[N] - u0;
    return trace;
}

CaratheodoryTrace solve_fixed(const LagrangianModel& lag, const DiscretePath& path, double u0,
                              int substeps_per_cell) {
    path.validate();
    const int N = path.cells();
    const double h = path.h();
    CaratheodoryTrace trace;
    trace.u.resize(N + 1);
    trace.u0 = u0;
    trace.t_final = path.t_final;
    trace.u[0] = u0;
    double u = u0;
    for (int k = 0; k < N; ++k) {
        u = rk4_cell(lag, path.node(k), path.velocity(k), k * h, h, u, substeps_per_cell);
        trace.u[k + 1] = u;
        trace.steps_accepted += substeps_per_cell;
    }
    trace.action = trace.u[N] - u0;
    return trace;
}

BoundReport check_lower_bound(const CaratheodoryTrace& trace, const LagrangianModel& lag) {
    BoundReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    const int N = static_cast<int>(trace.u.size()) - 1;
    const double h = trace.t_final / N;
    for (int k = 0; k <= N; ++k) {
        double s = k * h;
        double bound = -std::exp(lag.K * s) * (std::abs(trace.u0) + lag.c0 * s);
        double margin = trace.u[k] - bound;
        if (margin < rep.margin) {
            rep.margin = margin;
            rep.worst_index = k;
        }
    }
    rep.pass = rep.margin >= -1e-9;
    return rep;
}

BoundReport check_upper_bound(const CaratheodoryTrace& trace, const LagrangianModel& lag,
                              double R) {
    const double t = trace.t_final;
    double kappa = lag.theta0_bar(R / t) + 2.0 * lag.c0;
    double bound = t * (kappa + lag.K * std::abs(trace.u0)) * std::exp(lag.K * t);
    BoundReport rep;
    rep.margin = bound - trace.action;
    rep.pass = rep.margin >= -1.0;  // frozen epsilon slack
    if (!rep.pass) rep.note = "action exceeds the near-minimizer upper bound";
    return rep;
}

std::string trace_csv(const LagrangianModel& lag, const DiscretePath& path,
                      const CaratheodoryTrace& trace) {
    const int N = path.cells();
    const double h = path.h();
    std::ostringstream ss;
    ss << "s,u,L\n";
    for (int k = 0; k <= N; ++k) {
        Vector v = path.velocity(std::min(k, N - 1));
        double lval = lag.eval(path.node(k), trace.u[k], v);
        ss << io::fmt(k * h) << ',' << io::fmt(trace.u[k]) << ',' << io::fmt(lval) << '\n';
    }
    return ss.str();
}

}  // namespace herglotz
