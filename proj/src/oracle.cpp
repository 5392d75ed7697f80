#include "herglotz/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace herglotz::oracle {

double discounted_value(L0Kind kind, double lambda, const Vector& x0, const Vector& x1, double t,
                        double u0) {
    if (kind != L0Kind::QuadraticFree)
        throw UnsupportedModel("discounted_value: closed form implemented for |v|^2/2 only");
    if (lambda < 0.0) throw Error("discounted_value: lambda must be nonnegative");
    if (!(t > 0.0)) throw Error("discounted_value: t must be positive");
    double d2 = (x1 - x0).squaredNorm();
    if (lambda * t < 1e-12) return u0 + d2 / (2.0 * t);
    double den = -std::expm1(-lambda * t);  // 1 - e^{-lambda t}
    return std::exp(-lambda * t) * (u0 + lambda * d2 / (2.0 * den));
}

long BruteForceSpec::total_paths() const {
    long per_step = 1;
    for (int a = 0; a < dim; ++a) per_step *= static_cast<long>(velocity_grid.size());
    long total = 1;
    for (int k = 0; k < n_steps; ++k) {
        total *= per_step;
        if (total > 100'000'000L) return total;  // saturate, caller rejects anyway
    }
    return total;
}

namespace {

// Independent reference integrator: classical RK4 at two resolutions with
// Richardson extrapolation of the final value.
double step_value(const LagrangianModel& lag, const Vector& a, const Vector& v, double h,
                  double u_in) {
    auto pass = [&](int substeps) {
        double u = u_in;
        double dt = h / substeps;
        for (int i = 0; i < substeps; ++i) {
            double s = i * dt;
            auto f = [&](double ls, double uu) {
                double val = lag.eval(a + ls * v, uu, v);
                if (!std::isfinite(val)) throw NonFinite("brute force: L not finite");
                return val;
            };
            double k1 = f(s, u);
            double k2 = f(s + 0.5 * dt, u + 0.5 * dt * k1);
            double k3 = f(s + 0.5 * dt, u + 0.5 * dt * k2);
            double k4 = f(s + dt, u + dt * k3);
            u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return u;
    };
    double coarse = pass(32), fine = pass(64);
    return (16.0 * fine - coarse) / 15.0;
}

struct Enumerator {
    const LagrangianModel& lag;
    const BruteForceSpec& spec;
    const Vector& x0;
    const Vector& x1;
    double t, u0, h, slack;
    BruteIntegrator integrator;
    std::vector<Vector> options;
    double vmax = 0.0;

    BruteForceResult result;
    bool found = false;
    std::vector<Vector> current;  // velocity choices so far

    void recurse(const Vector& x, int step) {
        if (step == spec.n_steps) {
            result.enumerated += 1;
            if ((x - x1).lpNorm<Eigen::Infinity>() > slack) return;
            result.admissible += 1;
            score(x);
            return;
        }
        // Reachability pruning: remaining steps cannot close the gap.
        double reach = vmax * h * (spec.n_steps - step) + slack;
        if ((x1 - x).lpNorm<Eigen::Infinity>() > reach) {
            long skipped = 1;
            for (int k = step; k < spec.n_steps; ++k)
                skipped *= static_cast<long>(options.size());
            result.enumerated += skipped;
            return;
        }
        for (const Vector& v : options) {
            current.push_back(v);
            recurse(x + h * v, step + 1);
            current.pop_back();
        }
    }

    void score(const Vector& x_end) {
        DiscretePath path;
        path.t_final = t;
        path.x0 = x0;
        path.x1 = x_end;
        Vector x = x0;
        for (int k = 0; k + 1 < spec.n_steps; ++k) {
            x += h * current[k];
            path.nodes.push_back(x);
        }

        double action;
        if (integrator == BruteIntegrator::CaratheodorySolve) {
            action = solve(lag, path, u0).action;
        } else {
            double u = u0;
            for (int k = 0; k < spec.n_steps; ++k)
                u = step_value(lag, path.node(k), current[k], h, u);
            action = u - u0;
        }
        if (!found || action < result.action) {
            found = true;
            result.action = action;
            result.best_path = path;
        }
    }
};

}  // namespace

BruteForceResult brute_force_min(const LagrangianModel& lag, const BruteForceSpec& spec,
                                 const Vector& x0, const Vector& x1, double t, double u0,
                                 BruteIntegrator integrator) {
    if (spec.n_steps < 2 || spec.n_steps > 6)
        throw Error("brute_force_min: n_steps must be in [2, 6]");
    if (spec.dim != 1 && spec.dim != 2) throw Error("brute_force_min: dim must be 1 or 2");
    if (spec.velocity_grid.empty()) throw Error("brute_force_min: empty velocity grid");
    if (spec.total_paths() > 10'000'000L)
        throw Error("brute_force_min: enumeration exceeds 1e7 paths");

    const double h = t / spec.n_steps;
    std::vector<double> grid = spec.velocity_grid;
    std::sort(grid.begin(), grid.end());
    double max_gap = 0.0;
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        max_gap = std::max(max_gap, grid[i + 1] - grid[i]);
    double slack = spec.landing_slack >= 0.0 ? spec.landing_slack
                                             : max_gap * h + 1e-9 * (1.0 + x1.norm());

    Enumerator en{lag, spec, x0, x1, t, u0, h, slack, integrator, {}, 0.0, {}, false, {}};
    if (spec.dim == 1) {
        for (double v : grid) {
            Vector w(1);
            w[0] = v;
            en.options.push_back(w);
        }
    } else {
        for (double va : grid)
            for (double vb : grid) {
                Vector w(2);
                w[0] = va;
                w[1] = vb;
                en.options.push_back(w);
            }
    }
    for (double v : grid) en.vmax = std::max(en.vmax, std::abs(v));

    en.recurse(x0, 0);
    if (!en.found) throw NoAdmissiblePath("brute_force_min: velocity grid cannot reach x1");
    return en.result;
}

}  // namespace herglotz::oracle
