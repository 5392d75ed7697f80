#include "herglotz/characteristics.hpp"

#include <cmath>
#include <sstream>

#include "herglotz/direct.hpp"
#include "herglotz/io.hpp"

namespace herglotz::characteristics {

namespace {

struct Derivative {
    Vector dx, dp;
    double du;
};

Derivative lie_rhs(const HamiltonianModel& ham, const ContactState& s) {
    HamiltonianEval he = ham.eval_all(s.x, s.u, s.p);
    Derivative d;
    d.dx = he.grad_p;
    d.dp = -he.grad_x - he.du * s.p;
    d.du = s.p.dot(he.grad_p) - he.value;
    return d;
}

ContactState advance(const ContactState& s, const Derivative& d, double dt) {
    return {s.x + dt * d.dx, s.p + dt * d.dp, s.u + dt * d.du};
}

ContactState rk4_step(const HamiltonianModel& ham, const ContactState& s, double dt) {
    Derivative k1 = lie_rhs(ham, s);
    Derivative k2 = lie_rhs(ham, advance(s, k1, 0.5 * dt));
    Derivative k3 = lie_rhs(ham, advance(s, k2, 0.5 * dt));
    Derivative k4 = lie_rhs(ham, advance(s, k3, dt));
    ContactState out;
    out.x = s.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    out.p = s.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    out.u = s.u + dt / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    if (!out.finite()) throw NonFinite("flow: orbit blew up");
    return out;
}

ContactState integrate_final(const HamiltonianModel& ham, const ContactState& start, double t,
                             int steps) {
    ContactState s = start;
    double dt = t / steps;
    for (int i = 0; i < steps; ++i) s = rk4_step(ham, s, dt);
    return s;
}

}  // namespace

FlowResult flow(const HamiltonianModel& ham, const ContactState& start, double t, int steps) {
    if (steps < 1) throw Error("flow: steps must be positive");
    if (!start.finite()) throw NonFinite("flow: non-finite start state");

    FlowResult out;
    out.dt = t / steps;
    out.states.reserve(steps + 1);
    out.states.push_back(start);
    if (t == 0.0) {
        out.states.assign(steps + 1, start);
        return out;
    }
    for (int i = 0; i < steps; ++i)
        out.states.push_back(rk4_step(ham, out.states.back(), out.dt));

    ContactState halved = integrate_final(ham, start, t, 2 * steps);
    const ContactState& coarse = out.states.back();
    double diff = std::max({(coarse.x - halved.x).lpNorm<Eigen::Infinity>(),
                            (coarse.p - halved.p).lpNorm<Eigen::Infinity>(),
                            std::abs(coarse.u - halved.u)});
    out.error_estimate = diff * 16.0 / 15.0;
    out.refinement_warning = out.error_estimate > 1e-9;
    return out;
}

ShootResult shoot(const HamiltonianModel& ham, const Vector& x0, const Vector& x1, double t,
                  double u0, const Vector& p_init, int steps) {
    if (!(t > 0.0)) throw Error("shoot: t must be positive");
    const int n = static_cast<int>(x0.size());
    const double tol = 1e-9 * (1.0 + x1.norm());

    Vector p = p_init;
    auto land = [&](const Vector& p0) {
        return integrate_final(ham, {x0, p0, u0}, t, steps).x;
    };
    Vector residual = land(p) - x1;

    int iter = 0;
    for (; iter < 50; ++iter) {
        double miss = residual.norm();
        if (miss <= tol) break;

        Matrix jac(n, n);
        for (int j = 0; j < n; ++j) {
            double delta = 1e-7 * (1.0 + std::abs(p[j]));
            Vector pj = p;
            pj[j] += delta;
            jac.col(j) = (land(pj) - x1 - residual) / delta;
        }
        Vector step = jac.fullPivLu().solve(-residual);
        if (!step.allFinite()) throw ShootingDivergence("shoot: singular shooting Jacobian");

        double lambda = 1.0;
        bool accepted = false;
        for (int back = 0; back < 30; ++back) {
            Vector cand = p + lambda * step;
            Vector res_cand = land(cand) - x1;
            if (res_cand.allFinite() && res_cand.norm() <= (1.0 - 0.25 * lambda) * miss) {
                p = cand;
                residual = res_cand;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw ShootingDivergence("shoot: damped Newton stalled");
    }
    if (residual.norm() > tol)
        throw ShootingDivergence("shoot: no convergence in 50 Newton steps");

    ShootResult out;
    out.p0 = p;
    out.newton_iterations = iter;
    out.orbit = flow(ham, {x0, p, u0}, t, steps);
    out.miss = (out.orbit.states.back().x - x1).norm();
    return out;
}

std::vector<Vector> dual_arc(const LagrangianModel& lag, const DiscretePath& path,
                             const CaratheodoryTrace& trace) {
    direct::MidpointData md = direct::midpoint_data(lag, path, trace);
    const int N = path.cells();
    std::vector<Vector> arc(N);
    for (int k = 0; k < N; ++k)
        arc[k] = lag.grad_v(md.x_mid[k], md.u_mid[k], path.velocity(k));
    return arc;
}

Vector dual_arc_start(const std::vector<Vector>& arc) {
    if (arc.size() == 1) return arc[0];
    return 1.5 * arc[0] - 0.5 * arc[1];
}

std::string orbit_csv(const HamiltonianModel& ham, const FlowResult& orbit) {
    std::ostringstream ss;
    const int n = static_cast<int>(orbit.states.front().x.size());
    ss << "s";
    for (int i = 0; i < n; ++i) ss << ",x" << i;
    for (int i = 0; i < n; ++i) ss << ",p" << i;
    ss << ",u,H\n";
    for (size_t k = 0; k < orbit.states.size(); ++k) {
        const ContactState& s = orbit.states[k];
        ss << io::fmt(k * orbit.dt);
        for (int i = 0; i < n; ++i) ss << ',' << io::fmt(s.x[i]);
        for (int i = 0; i < n; ++i) ss << ',' << io::fmt(s.p[i]);
        ss << ',' << io::fmt(s.u) << ',' << io::fmt(ham.eval(s.x, s.u, s.p)) << '\n';
    }
    return ss.str();
}

}  // namespace herglotz::characteristics
