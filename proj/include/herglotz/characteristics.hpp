#pragma once

#include <vector>

#include "herglotz/caratheodory.hpp"
#include "herglotz/model.hpp"

namespace herglotz::characteristics {

/// Point of the extended phase space flowed by the characteristic system
///   x' = H_p,  p' = -H_x - H_u p,  u' = p . x' - H.
struct ContactState {
    Vector x;
    Vector p;
    double u = 0.0;

    bool finite() const { return x.allFinite() && p.allFinite() && std::isfinite(u); }
};

struct FlowResult {
    std::vector<ContactState> states;  // steps + 1 samples
    double dt = 0.0;
    double error_estimate = 0.0;  // step-halving estimate on the final state
    bool refinement_warning = false;
};

/// RK4 with `steps` uniform steps; attaches a RefinementWarning flag when the
/// step-halving estimate on the final state exceeds 1e-9.
FlowResult flow(const HamiltonianModel& ham, const ContactState& start, double t, int steps);

struct ShootResult {
    FlowResult orbit;
    Vector p0;
    int newton_iterations = 0;
    double miss = 0.0;
};

/// Finds p0 so the flow from (x0, p0, u0) lands at x1 after time t, by damped
/// Newton with a forward-difference Jacobian.  Throws ShootingDivergence after
/// 50 Newton steps.
ShootResult shoot(const HamiltonianModel& ham, const Vector& x0, const Vector& x1, double t,
                  double u0, const Vector& p_init, int steps = 1024);

/// Dual arc p = L_v(xi, u, xi') at cell midpoints of a discrete path.
std::vector<Vector> dual_arc(const LagrangianModel& lag, const DiscretePath& path,
                             const CaratheodoryTrace& trace);

/// Linear extrapolation of the midpoint dual arc to s = 0.
Vector dual_arc_start(const std::vector<Vector>& arc);

/// CSV columns: s, x..., p..., u, H.
std::string orbit_csv(const HamiltonianModel& ham, const FlowResult& orbit);

}  // namespace herglotz::characteristics
