#pragma once

#include <optional>
#include <string>
#include <vector>

#include "herglotz/caratheodory.hpp"

namespace herglotz::direct {

struct MinimizeOptions {
    int N = 256;
    double gtol = 1e-8;  // converged iff ||grad||_inf <= gtol * (1 + |action|)
    int max_iters = 1000;
    bool multistart = false;
    int multistart_count = 5;
    std::uint64_t seed = 0;
    SolveOptions solve;
    std::optional<DiscretePath> init;  // resampled to N cells when present
};

struct MinimizeResult {
    DiscretePath path;
    CaratheodoryTrace trace;
    double action = 0.0;
    double grad_inf_norm = 0.0;
    double erdmann_spread = 0.0;
    double herglotz_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status;
    std::vector<double> action_history;
};

/// Kernel weights w(s_k) = exp(int_{s_k}^t L_u dr) accumulated by the
/// trapezoidal rule along the solved trace.  w[N] == 1 exactly.
struct AdjointWeights {
    Eigen::VectorXd w;
};

AdjointWeights adjoint_weights(const LagrangianModel& lag, const DiscretePath& path,
                               const CaratheodoryTrace& trace);

/// Midpoint states shared by the gradient and the extremal diagnostics:
/// per-cell midpoint position, interpolated u, and the running integral of
/// L_u up to nodes and cell midpoints.
struct MidpointData {
    Eigen::VectorXd s_mid;
    std::vector<Vector> x_mid;
    Eigen::VectorXd u_mid;
    Eigen::VectorXd lu_node;  // int_0^{s_k} L_u, k = 0..N (trapezoid)
    Eigen::VectorXd lu_mid;   // int_0^{m_k} L_u, k = 0..N-1
};

MidpointData midpoint_data(const LagrangianModel& lag, const DiscretePath& path,
                           const CaratheodoryTrace& trace);

/// Action value and its adjoint gradient with respect to the interior nodes:
/// grad[k] = cell-midpoint quadrature of w(s) (L_x phi_k + L_v phi_k') with
/// phi_k the hat function of node k.
std::pair<double, std::vector<Vector>> action_gradient(const LagrangianModel& lag,
                                                       const DiscretePath& path, double u0,
                                                       const SolveOptions& solve = {});

/// Minimizes the action over interior nodes by L-BFGS (memory 10,
/// strong-Wolfe line search) from the straight-line initialization.
MinimizeResult minimize(const LagrangianModel& lag, const Vector& x0, const Vector& x1, double t,
                        double u0, const MinimizeOptions& opts = {});

/// Per-cell first integral E_k = exp(-int_0^{m_k} L_u) (L_v . v - L) at cell
/// midpoints; constant along minimizers.
std::vector<double> erdmann_profile(const LagrangianModel& lag, const DiscretePath& path,
                                    const CaratheodoryTrace& trace);

double spread(const std::vector<double>& values);

/// Spread tolerance for a converged minimizer: 10 * gtol_eff * e^{Kt} * N.
double erdmann_tolerance(const LagrangianModel& lag, double t, int N, double gtol_eff);

/// Discrete L2 norm over interior nodes of d/ds L_v - L_x - L_u L_v,
/// with d/ds by central differences of cell-midpoint L_v values.
double herglotz_residual(const LagrangianModel& lag, const DiscretePath& path,
                         const CaratheodoryTrace& trace);

struct TestReport {
    bool pass = true;
    double worst = 0.0;
    std::string note;
};

/// Draws 20 random grid-piecewise-constant time dilations alpha in [1/2,3/2]
/// with integral t, reparametrizes the minimizer, re-solves, and checks that
/// no reparametrization beats the minimizer's action.
TestReport reparametrization_test(const LagrangianModel& lag, const MinimizeResult& result,
                                  std::uint64_t alpha_seed);

}  // namespace herglotz::direct
