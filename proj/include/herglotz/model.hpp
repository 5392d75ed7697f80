#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "herglotz/errors.hpp"

namespace herglotz {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Superlinear growth envelope r -> a * r^q + c with q > 1.
struct PowerEnvelope {
    double a = 0.5;
    double q = 2.0;
    double c = 0.0;

    double operator()(double r) const { return a * std::pow(r, q) + c; }
    bool superlinear() const { return a > 0.0 && q > 1.0; }
    std::string describe() const;
};

/// A contact Lagrangian L(x, u, v) with analytic first partials and the
/// velocity Hessian, plus the constants and growth envelopes that the
/// a-priori bounds consume.  All callables must be pure.
struct LagrangianModel {
    int dim = 1;
    std::function<double(const Vector& x, double u, const Vector& v)> eval;
    std::function<Vector(const Vector& x, double u, const Vector& v)> grad_x;
    std::function<Vector(const Vector& x, double u, const Vector& v)> grad_v;
    std::function<double(const Vector& x, double u, const Vector& v)> du;
    std::function<Matrix(const Vector& x, double u, const Vector& v)> hess_vv;

    double K = 0.0;   // bound on |L_u|
    double c0 = 0.0;  // offset in the lower growth bound
    PowerEnvelope theta0;      // lower envelope, theta0(0) = 0
    PowerEnvelope theta0_bar;  // upper envelope

    std::string name;
    std::map<std::string, double> params;
};

struct HamiltonianEval {
    double value = 0.0;
    Vector grad_x;
    Vector grad_p;
    double du = 0.0;
    Vector argmax_v;
};

/// Hamiltonian H(x, u, p) obtained from a Lagrangian by convex duality.
/// eval_all performs a single inner maximization and returns value and
/// all partials together; the individual accessors delegate to it.
struct HamiltonianModel {
    int dim = 1;
    std::function<double(const Vector& x, double u, const Vector& p)> eval;
    std::function<Vector(const Vector& x, double u, const Vector& p)> grad_x;
    std::function<Vector(const Vector& x, double u, const Vector& p)> grad_p;
    std::function<double(const Vector& x, double u, const Vector& p)> du;
    std::function<HamiltonianEval(const Vector& x, double u, const Vector& p)> eval_all;
};

struct LegendreResult {
    double value = 0.0;
    Vector argmax_v;
    int iterations = 0;
};

/// Computes H(x,u,p) = sup_v { <p,v> - L(x,u,v) } by damped Newton on the
/// strictly concave inner problem, started from v_init.
/// Throws NonConvergence after 100 iterations, SingularHessian when the
/// velocity Hessian has conditioning beyond 1e12 (or loses definiteness).
LegendreResult legendre_transform(const LagrangianModel& lag, const Vector& x, double u,
                                  const Vector& p, const Vector& v_init);

/// Wraps a Lagrangian as its dual Hamiltonian; H_x = -L_x, H_p = argmax_v,
/// H_u = -L_u at the maximizing velocity (envelope formulas).
HamiltonianModel make_hamiltonian(const LagrangianModel& lag);

/// Sampling region for condition checks.
struct SampleBox {
    Vector x_lo, x_hi;
    Vector v_lo, v_hi;
    double u_lo = -1.0, u_hi = 1.0;

    static SampleBox cube(int dim, double x_half, double v_half, double u_half);
};

struct ConditionEntry {
    bool pass = true;
    double worst = 0.0;  // worst margin / witness value, meaning depends on the condition
    Vector x, v;
    double u = 0.0;
    std::string note;
};

struct ConditionReport {
    ConditionEntry l1;  // velocity Hessian SPD; worst = smallest eigenvalue seen
    ConditionEntry l2;  // envelope sandwich; worst = most negative margin
    ConditionEntry l3;  // |L_u| <= K; worst = largest |L_u| seen
    ConditionEntry l2_prime;  // empirical C_A estimate (reported, never failed)
    double C_A = 0.0;

    bool all_pass() const { return l1.pass && l2.pass && l3.pass; }
};

/// Samples the box (plus its corners) and reports, per condition, pass/fail
/// with the worst witness.  The C_A estimate for the rescaling condition is
/// the empirical maximum over r in {1, 1.25, 1.5}; it is a per-box estimate.
ConditionReport check_conditions(const LagrangianModel& lag, const SampleBox& box,
                                 int n_samples, std::uint64_t seed = 0);

struct ModelInfo {
    std::string name;
    std::vector<std::pair<std::string, double>> params;  // name, default value
    std::string conditions;
};

using ModelFactory =
    std::function<LagrangianModel(const std::map<std::string, double>&, int dim)>;

class ModelRegistry {
public:
    void add(ModelInfo info, ModelFactory factory);
    bool contains(const std::string& name) const;
    LagrangianModel make(const std::string& name, const std::map<std::string, double>& params,
                         int dim) const;
    const std::vector<ModelInfo>& list() const { return infos_; }

    /// quadratic-free, mechanical, discounted, bounded-contact
    static const ModelRegistry& builtins();

private:
    std::vector<ModelInfo> infos_;
    std::vector<ModelFactory> factories_;
};

// Direct constructors for the built-in family (used heavily by tests).
LagrangianModel quadratic_free_model(int dim = 1);
LagrangianModel mechanical_model(double amp = 1.0, int dim = 1);
LagrangianModel discounted_model(double lambda = 1.0, int dim = 1);
LagrangianModel bounded_contact_model(double kappa = 0.5, int dim = 1);

}  // namespace herglotz
