#pragma once

#include <string>
#include <vector>

#include "herglotz/model.hpp"

namespace herglotz {

/// Piecewise-linear curve on the uniform grid s_k = k * t_final / N.
/// Stores the N-1 interior nodes; node 0 is x0 and node N is x1.
struct DiscretePath {
    double t_final = 1.0;
    Vector x0, x1;
    std::vector<Vector> nodes;

    int cells() const { return static_cast<int>(nodes.size()) + 1; }
    double h() const { return t_final / cells(); }
    Vector node(int k) const;
    Vector velocity(int cell) const;  // (x_{k+1} - x_k) * N / t_final
    Vector position(double s) const;
    double length() const;  // sum of |x_{k+1} - x_k|

    void validate() const;  // throws Error on malformed paths

    static DiscretePath straight(const Vector& x0, const Vector& x1, double t, int N);
};

/// Resamples the piecewise-linear curve onto a uniform grid with N cells.
DiscretePath resample(const DiscretePath& path, int N);

/// Solution u of du/ds = L(xi(s), u, xi'(s)) sampled at the path's grid nodes.
struct CaratheodoryTrace {
    Eigen::VectorXd u;  // N+1 values, u[0] == u0
    double u0 = 0.0;
    double action = 0.0;  // u[N] - u0
    double t_final = 0.0;
    long steps_accepted = 0;
    long steps_rejected = 0;
    double max_step_error = 0.0;
};

struct SolveOptions {
    int min_substeps = 4;       // per cell, doubled until the error test passes
    double rel_tol = 1e-10;     // Richardson estimate <= rel_tol * (1 + |u|)
    int max_substeps = 1 << 16;
};

/// Integrates the Carathéodory equation cell by cell with classical RK4.
/// Substeps per cell are doubled until the Richardson estimate passes.
/// Deterministic; throws NonFinite if L blows up along the path.
CaratheodoryTrace solve(const LagrangianModel& lag, const DiscretePath& path, double u0,
                        const SolveOptions& opts = {});

/// Fixed-resolution variant (no error control); used by refinement studies.
CaratheodoryTrace solve_fixed(const LagrangianModel& lag, const DiscretePath& path, double u0,
                              int substeps_per_cell);

struct BoundReport {
    bool pass = false;
    double margin = 0.0;
    int worst_index = -1;
    std::string note;
};

/// Gronwall lower bound: min_k u[k] + e^{K s_k} (|u0| + c0 s_k); pass iff >= -1e-9.
BoundReport check_lower_bound(const CaratheodoryTrace& trace, const LagrangianModel& lag);

/// Upper bound for near-minimizing traces with |x1-x0| <= R:
/// u[N]-u0 <= t (kappa(R/t) + K|u0|) e^{Kt} + 1 with kappa(r) = theta0_bar(r) + 2 c0.
/// The reported margin excludes the +1 slack, so the straight-line comparison
/// path of the quadratic model attains margin 0.
BoundReport check_upper_bound(const CaratheodoryTrace& trace, const LagrangianModel& lag,
                              double R);

/// CSV columns: s, u, L (L evaluated with the incoming cell velocity).
std::string trace_csv(const LagrangianModel& lag, const DiscretePath& path,
                      const CaratheodoryTrace& trace);

}  // namespace herglotz
