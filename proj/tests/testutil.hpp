#pragma once

#include <cmath>
#include <random>

#include "herglotz/caratheodory.hpp"
#include "herglotz/direct.hpp"

namespace testutil {

using herglotz::DiscretePath;
using herglotz::LagrangianModel;
using herglotz::Vector;

inline Vector scalar1(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

// Straight line perturbed by a low-frequency random sine series; keeps
// velocities moderate so the ODE tolerances stay far from their thresholds.
inline DiscretePath random_smooth_path(std::mt19937_64& rng, const Vector& x0, const Vector& x1,
                                       double t, int N, double amp) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int dim = static_cast<int>(x0.size());
    DiscretePath p = DiscretePath::straight(x0, x1, t, N);
    std::vector<Vector> coef(4);
    for (auto& c : coef) {
        c = Vector(dim);
        for (int i = 0; i < dim; ++i) c[i] = gauss(rng);
    }
    for (int k = 1; k < N; ++k) {
        double s = static_cast<double>(k) / N;
        Vector delta = Vector::Zero(dim);
        for (size_t j = 0; j < coef.size(); ++j)
            delta += amp / (j + 1.0) * std::sin((j + 1.0) * M_PI * s) * coef[j];
        p.nodes[k - 1] += delta;
    }
    return p;
}

// Central finite differences of the action with respect to every interior
// node coordinate.
inline std::vector<Vector> fd_action_gradient(const LagrangianModel& lag, const DiscretePath& path,
                                              double u0, double step = 1e-6) {
    const int dim = static_cast<int>(path.x0.size());
    std::vector<Vector> grad(path.nodes.size(), Vector::Zero(dim));
    DiscretePath work = path;
    for (size_t k = 0; k < path.nodes.size(); ++k) {
        for (int i = 0; i < dim; ++i) {
            work.nodes[k][i] = path.nodes[k][i] + step;
            double fp = herglotz::solve(lag, work, u0).action;
            work.nodes[k][i] = path.nodes[k][i] - step;
            double fm = herglotz::solve(lag, work, u0).action;
            work.nodes[k][i] = path.nodes[k][i];
            grad[k][i] = (fp - fm) / (2.0 * step);
        }
    }
    return grad;
}

inline double grad_rel_error(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    double diff = 0.0, scale = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        diff = std::max(diff, (a[k] - b[k]).template lpNorm<Eigen::Infinity>());
        scale = std::max(scale, b[k].template lpNorm<Eigen::Infinity>());
    }
    return diff / std::max(scale, 1e-12);
}

// Closed forms for the discounted benchmark L = |v|^2/2 - lambda u in 1D.
struct DiscountedExtremal {
    double lambda, x0, x1, t, u0;

    double C() const { return lambda * (x1 - x0) / (-std::expm1(-lambda * t)); }
    double xi(double s) const { return x0 + C() * (-std::expm1(-lambda * s)) / lambda; }
    double xi_dot(double s) const { return C() * std::exp(-lambda * s); }
    double u(double s) const {
        // u' = xi_dot^2/2 - lambda u
        double b = C() * C() / 2.0;
        return std::exp(-lambda * s) * (u0 + b * (-std::expm1(-lambda * s)) / lambda);
    }
    double p(double s) const { return xi_dot(s); }
    // E(s) = e^{lambda s} (xi_dot^2/2 + lambda u), constant along the extremal
    double erdmann_constant() const { return C() * C() / 2.0 + lambda * u0; }
};

}  // namespace testutil
