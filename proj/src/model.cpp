#include "herglotz/model.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

namespace herglotz {

std::string PowerEnvelope::describe() const {
    std::ostringstream ss;
    ss << "power(" << a << "," << q << ")";
    if (c != 0.0) ss << "+" << c;
    return ss.str();
}

namespace {

bool finite(double x) { return std::isfinite(x); }
bool finite(const Vector& v) { return v.allFinite(); }

void check_spd(const Matrix& hess, double& min_eig) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    min_eig = lo;
    if (!(lo > 0.0)) throw SingularHessian("velocity Hessian not positive definite");
    if (hi / lo > 1e12) throw SingularHessian("velocity Hessian conditioning exceeds 1e12");
}

}  // namespace

LegendreResult legendre_transform(const LagrangianModel& lag, const Vector& x, double u,
                                  const Vector& p, const Vector& v_init) {
    if (!finite(v_init) || !finite(p)) throw NonFinite("legendre_transform: non-finite input");
    Vector v = v_init;
    double tol = 1e-10 * (1.0 + p.norm());
    auto objective = [&](const Vector& w) { return p.dot(w) - lag.eval(x, u, w); };

    double fv = objective(v);
    for (int iter = 0; iter < 100; ++iter) {
        Vector residual = p - lag.grad_v(x, u, v);  // gradient of the inner objective
        if (!finite(residual)) throw NonFinite("legendre_transform: non-finite gradient");
        if (residual.norm() <= tol)
            return {fv, v, iter};

        Matrix hess = lag.hess_vv(x, u, v);
        double min_eig = 0;
        check_spd(hess, min_eig);
        Vector step = hess.ldlt().solve(residual);

        // Armijo backtracking on the concave objective.
        double slope = residual.dot(step);
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            Vector cand = v + alpha * step;
            double fc = objective(cand);
            if (finite(fc) && fc >= fv + 1e-4 * alpha * slope) {
                v = cand;
                fv = fc;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) throw NonConvergence("legendre_transform: backtracking stalled");
    }
    throw NonConvergence("legendre_transform: no convergence in 100 iterations");
}

HamiltonianModel make_hamiltonian(const LagrangianModel& lag) {
    auto shared = std::make_shared<LagrangianModel>(lag);
    HamiltonianModel ham;
    ham.dim = lag.dim;
    ham.eval_all = [shared](const Vector& x, double u, const Vector& p) {
        // Warm start at v = p; exact for |v|^2/2-type kinetic terms.
        LegendreResult lr = legendre_transform(*shared, x, u, p, p);
        HamiltonianEval out;
        out.value = lr.value;
        out.grad_x = -shared->grad_x(x, u, lr.argmax_v);
        out.grad_p = lr.argmax_v;
        out.du = -shared->du(x, u, lr.argmax_v);
        out.argmax_v = lr.argmax_v;
        return out;
    };
    ham.eval = [ham](const Vector& x, double u, const Vector& p) {
        return ham.eval_all(x, u, p).value;
    };
    ham.grad_x = [ham](const Vector& x, double u, const Vector& p) {
        return ham.eval_all(x, u, p).grad_x;
    };
    ham.grad_p = [ham](const Vector& x, double u, const Vector& p) {
        return ham.eval_all(x, u, p).grad_p;
    };
    ham.du = [ham](const Vector& x, double u, const Vector& p) {
        return ham.eval_all(x, u, p).du;
    };
    return ham;
}

SampleBox SampleBox::cube(int dim, double x_half, double v_half, double u_half) {
    SampleBox b;
    b.x_lo = Vector::Constant(dim, -x_half);
    b.x_hi = Vector::Constant(dim, x_half);
    b.v_lo = Vector::Constant(dim, -v_half);
    b.v_hi = Vector::Constant(dim, v_half);
    b.u_lo = -u_half;
    b.u_hi = u_half;
    return b;
}

namespace {

struct BoxSampler {
    const SampleBox& box;
    int dim;
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> unit{0.0, 1.0};

    Vector vec(const Vector& lo, const Vector& hi) {
        Vector out(dim);
        for (int i = 0; i < dim; ++i) out[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
        return out;
    }
    double scalar(double lo, double hi) { return lo + (hi - lo) * unit(rng); }
};

}  // namespace

ConditionReport check_conditions(const LagrangianModel& lag, const SampleBox& box,
                                 int n_samples, std::uint64_t seed) {
    const int dim = lag.dim;
    ConditionReport rep;
    rep.l1.worst = std::numeric_limits<double>::infinity();
    rep.l2.worst = std::numeric_limits<double>::infinity();
    rep.l3.worst = 0.0;

    std::vector<std::tuple<Vector, double, Vector>> samples;
    BoxSampler sampler{box, dim, std::mt19937_64(seed)};
    for (int i = 0; i < n_samples; ++i)
        samples.emplace_back(sampler.vec(box.x_lo, box.x_hi), sampler.scalar(box.u_lo, box.u_hi),
                             sampler.vec(box.v_lo, box.v_hi));
    // Corner samples make extrema on monotone violations exact witnesses.
    if (dim <= 3) {
        for (int cx = 0; cx < (1 << dim); ++cx)
            for (int cv = 0; cv < (1 << dim); ++cv)
                for (int cu = 0; cu < 2; ++cu) {
                    Vector x(dim), v(dim);
                    for (int i = 0; i < dim; ++i) {
                        x[i] = (cx >> i) & 1 ? box.x_hi[i] : box.x_lo[i];
                        v[i] = (cv >> i) & 1 ? box.v_hi[i] : box.v_lo[i];
                    }
                    samples.emplace_back(x, cu ? box.u_hi : box.u_lo, v);
                }
    }

    for (const auto& [x, u, v] : samples) {
        // (L1): velocity Hessian symmetric positive definite
        Matrix hess = lag.hess_vv(x, u, v);
        double asym = (hess - hess.transpose()).cwiseAbs().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
        double lo = es.eigenvalues().minCoeff();
        if (lo < rep.l1.worst) {
            rep.l1.worst = lo;
            rep.l1.x = x; rep.l1.u = u; rep.l1.v = v;
        }
        if (!(lo > 0.0) || asym > 1e-10) rep.l1.pass = false;

        // (L2): theta0_bar(|v|) >= L(x,0,v) >= theta0(|v|) - c0
        double l0 = lag.eval(x, 0.0, v);
        double r = v.norm();
        double m_hi = lag.theta0_bar(r) - l0;
        double m_lo = l0 - (lag.theta0(r) - lag.c0);
        double margin = std::min(m_hi, m_lo);
        if (margin < rep.l2.worst) {
            rep.l2.worst = margin;
            rep.l2.x = x; rep.l2.u = 0.0; rep.l2.v = v;
        }
        if (margin < -1e-9 * (1.0 + std::abs(l0))) rep.l2.pass = false;

        // (L3): |L_u| <= K
        double lu = std::abs(lag.du(x, u, v));
        if (lu > rep.l3.worst) {
            rep.l3.worst = lu;
            rep.l3.x = x; rep.l3.u = u; rep.l3.v = v;
        }
        if (lu > lag.K + 1e-12 * (1.0 + lag.K)) rep.l3.pass = false;
    }

    // (L2'): empirical rescaling constant over r in {1, 1.25, 1.5}.
    // A per-box estimate, reported rather than asserted.
    const double slack = 1e-9;
    for (const auto& [x, u, v] : samples) {
        double denom = 1.0 + lag.eval(x, 0.0, v);
        if (denom <= slack) {
            rep.l2_prime.note = "degenerate denominator sample skipped";
            continue;
        }
        for (double r : {1.0, 1.25, 1.5}) {
            double ratio = (lag.eval(x, 0.0, r * v) - slack) / denom;
            if (ratio > rep.C_A) {
                rep.C_A = ratio;
                rep.l2_prime.x = x; rep.l2_prime.v = v; rep.l2_prime.u = 0.0;
            }
        }
    }
    rep.l2_prime.worst = rep.C_A;

    if (!rep.l3.pass) {
        std::ostringstream ss;
        ss << "|L_u|=" << rep.l3.worst << " exceeds declared K=" << lag.K;
        rep.l3.note = ss.str();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Built-in models

namespace {

LagrangianModel kinetic_base(int dim) {
    LagrangianModel m;
    m.dim = dim;
    m.grad_x = [dim](const Vector&, double, const Vector&) { return Vector::Zero(dim).eval(); };
    m.hess_vv = [dim](const Vector&, double, const Vector&) {
        return Matrix::Identity(dim, dim).eval();
    };
    m.theta0 = {0.5, 2.0, 0.0};
    m.theta0_bar = {0.5, 2.0, 0.0};
    return m;
}

}  // namespace

LagrangianModel quadratic_free_model(int dim) {
    LagrangianModel m = kinetic_base(dim);
    m.name = "quadratic-free";
    m.eval = [](const Vector&, double, const Vector& v) { return 0.5 * v.squaredNorm(); };
    m.grad_v = [](const Vector&, double, const Vector& v) { return v.eval(); };
    m.du = [](const Vector&, double, const Vector&) { return 0.0; };
    return m;
}

LagrangianModel mechanical_model(double amp, int dim) {
    LagrangianModel m = kinetic_base(dim);
    m.name = "mechanical";
    m.params = {{"amp", amp}};
    m.eval = [amp](const Vector& x, double, const Vector& v) {
        return 0.5 * v.squaredNorm() - amp * std::cos(x[0]);
    };
    m.grad_x = [amp, dim](const Vector& x, double, const Vector&) {
        Vector g = Vector::Zero(dim);
        g[0] = amp * std::sin(x[0]);
        return g;
    };
    m.grad_v = [](const Vector&, double, const Vector& v) { return v.eval(); };
    m.du = [](const Vector&, double, const Vector&) { return 0.0; };
    m.c0 = std::abs(amp);
    m.theta0_bar.c = std::abs(amp);
    return m;
}

LagrangianModel discounted_model(double lambda, int dim) {
    LagrangianModel m = kinetic_base(dim);
    m.name = "discounted";
    m.params = {{"lambda", lambda}};
    m.eval = [lambda](const Vector&, double u, const Vector& v) {
        return 0.5 * v.squaredNorm() - lambda * u;
    };
    m.grad_v = [](const Vector&, double, const Vector& v) { return v.eval(); };
    m.du = [lambda](const Vector&, double, const Vector&) { return -lambda; };
    m.K = std::abs(lambda);
    return m;
}

LagrangianModel bounded_contact_model(double kappa, int dim) {
    LagrangianModel m = kinetic_base(dim);
    m.name = "bounded-contact";
    m.params = {{"kappa", kappa}};
    m.eval = [kappa](const Vector&, double u, const Vector& v) {
        return 0.5 * v.squaredNorm() + kappa * std::sin(u);
    };
    m.grad_v = [](const Vector&, double, const Vector& v) { return v.eval(); };
    m.du = [kappa](const Vector&, double u, const Vector&) { return kappa * std::cos(u); };
    m.K = std::abs(kappa);
    return m;
}

void ModelRegistry::add(ModelInfo info, ModelFactory factory) {
    infos_.push_back(std::move(info));
    factories_.push_back(std::move(factory));
}

bool ModelRegistry::contains(const std::string& name) const {
    for (const auto& i : infos_)
        if (i.name == name) return true;
    return false;
}

LagrangianModel ModelRegistry::make(const std::string& name,
                                    const std::map<std::string, double>& params, int dim) const {
    for (size_t k = 0; k < infos_.size(); ++k) {
        if (infos_[k].name != name) continue;
        std::map<std::string, double> merged;
        for (const auto& [pname, pdefault] : infos_[k].params) merged[pname] = pdefault;
        for (const auto& [pname, pvalue] : params) {
            if (!merged.count(pname))
                throw Error("model '" + name + "' has no parameter '" + pname + "'");
            merged[pname] = pvalue;
        }
        return factories_[k](merged, dim);
    }
    throw UnsupportedModel("unknown model '" + name + "'");
}

const ModelRegistry& ModelRegistry::builtins() {
    static const ModelRegistry reg = [] {
        ModelRegistry r;
        r.add({"quadratic-free", {}, "L1 L2 L3 L2'"},
              [](const std::map<std::string, double>&, int dim) {
                  return quadratic_free_model(dim);
              });
        r.add({"mechanical", {{"amp", 1.0}}, "L1 L2 L3 L2'"},
              [](const std::map<std::string, double>& p, int dim) {
                  return mechanical_model(p.at("amp"), dim);
              });
        r.add({"discounted", {{"lambda", 1.0}}, "L1 L2 L3 L2'"},
              [](const std::map<std::string, double>& p, int dim) {
                  return discounted_model(p.at("lambda"), dim);
              });
        r.add({"bounded-contact", {{"kappa", 0.5}}, "L1 L2 L3 L2'"},
              [](const std::map<std::string, double>& p, int dim) {
                  return bounded_contact_model(p.at("kappa"), dim);
              });
        return r;
    }();
    return reg;
}

}  // namespace herglotz
