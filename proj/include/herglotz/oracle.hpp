#pragma once

#include "herglotz/caratheodory.hpp"

namespace herglotz::oracle {

enum class L0Kind { QuadraticFree };

/// Closed-form minimal value u(t) for L = |v|^2/2 - lambda u between x0 and
/// x1 in time t with u(0) = u0.  The extremal velocity is C e^{-lambda s}
/// with C = lambda (x1 - x0) / (1 - e^{-lambda t}); lambda -> 0 recovers
/// u0 + |x1-x0|^2 / (2t).  Throws UnsupportedModel for other kinetic terms.
double discounted_value(L0Kind kind, double lambda, const Vector& x0, const Vector& x1, double t,
                        double u0);

/// Exhaustive minimizer over velocity-lattice paths.  Velocities are drawn
/// per axis from `velocity_grid`; a path is admissible when it lands within
/// one velocity cell of x1.
struct BruteForceSpec {
    int n_steps = 4;                    // <= 6
    std::vector<double> velocity_grid;  // per-axis choices, shared by axes
    int dim = 1;                        // 1 or 2
    double landing_slack = -1.0;        // < 0: max grid gap * (t / n_steps)

    long total_paths() const;
};

enum class BruteIntegrator {
    StepRichardson,     // independent per-step RK4 with Richardson extrapolation
    CaratheodorySolve,  // score with the production solver
};

struct BruteForceResult {
    double action = 0.0;
    DiscretePath best_path;
    long admissible = 0;
    long enumerated = 0;
};

/// Enumerates every admissible lattice path, solves the Carathéodory equation
/// on each, and returns the minimum.  Deterministic: the first strictly
/// better path wins.  Throws NoAdmissiblePath when the lattice cannot reach
/// x1 within the slack.
BruteForceResult brute_force_min(const LagrangianModel& lag, const BruteForceSpec& spec,
                                 const Vector& x0, const Vector& x1, double t, double u0,
                                 BruteIntegrator integrator = BruteIntegrator::StepRichardson);

}  // namespace herglotz::oracle
