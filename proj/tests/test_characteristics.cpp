#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "herglotz/characteristics.hpp"
#include "herglotz/direct.hpp"
#include "testutil.hpp"

using namespace herglotz;
using namespace herglotz::characteristics;
using testutil::scalar1;

namespace {

double simpson(const std::vector<double>& f, double dt) {
    REQUIRE((f.size() - 1) % 2 == 0);
    double sum = f.front() + f.back();
    for (size_t i = 1; i + 1 < f.size(); ++i) sum += (i % 2 ? 4.0 : 2.0) * f[i];
    return sum * dt / 3.0;
}

}  // namespace

TEST_CASE("flow: free Hamiltonian moves in a straight characteristic") {
    HamiltonianModel ham = make_hamiltonian(quadratic_free_model(1));
    FlowResult orbit = flow(ham, {scalar1(0.0), scalar1(1.0), 0.0}, 1.0, 256);
    const ContactState& end = orbit.states.back();
    CHECK(std::abs(end.x[0] - 1.0) <= 1e-9);
    CHECK(std::abs(end.p[0] - 1.0) <= 1e-9);
    CHECK(std::abs(end.u - 0.5) <= 1e-9);  // u' = p x' - H = 1/2
    CHECK_FALSE(orbit.refinement_warning);
}

TEST_CASE("flow: contact term against the closed-form linear system") {
    // H = p^2/2 + u: p = e^{-s}, x = 1 - e^{-s}, u = (e^{-s} - e^{-2s}) / 2
    HamiltonianModel ham = make_hamiltonian(discounted_model(1.0, 1));
    FlowResult orbit = flow(ham, {scalar1(0.0), scalar1(1.0), 0.0}, 1.0, 512);
    const ContactState& end = orbit.states.back();
    double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
    CHECK(std::abs(end.x[0] - (1.0 - e1)) <= 1e-10);
    CHECK(std::abs(end.p[0] - e1) <= 1e-10);
    CHECK(std::abs(end.u - (e1 - e2) / 2.0) <= 1e-10);
    for (size_t i = 0; i < orbit.states.size(); i += 64) {
        double s = i * orbit.dt;
        CHECK(std::abs(orbit.states[i].p[0] - std::exp(-s)) <= 1e-10);
    }
}

TEST_CASE("flow: zero horizon returns the start state") {
    HamiltonianModel ham = make_hamiltonian(bounded_contact_model(0.5, 1));
    ContactState start{scalar1(0.3), scalar1(-0.7), 0.9};
    FlowResult orbit = flow(ham, start, 0.0, 16);
    for (const auto& s : orbit.states) {
        CHECK(s.x[0] == start.x[0]);
        CHECK(s.p[0] == start.p[0]);
        CHECK(s.u == start.u);
    }
}

TEST_CASE("shoot: free Hamiltonian hits the target with unit momentum") {
    HamiltonianModel ham = make_hamiltonian(quadratic_free_model(1));
    ShootResult sh = shoot(ham, scalar1(0.0), scalar1(1.0), 1.0, 0.0, scalar1(0.3), 256);
    CHECK(std::abs(sh.p0[0] - 1.0) <= 1e-9);
    CHECK(std::abs(sh.orbit.states.back().u - 0.5) <= 1e-9);
    CHECK(sh.miss <= 1e-9 * 2.0);
}

TEST_CASE("shoot: discounted extremal momentum and value") {
    HamiltonianModel ham = make_hamiltonian(discounted_model(1.0, 1));
    ShootResult sh = shoot(ham, scalar1(0.0), scalar1(1.0), 1.0, 0.0, scalar1(1.0), 1024);
    double p0_exact = 1.0 / (-std::expm1(-1.0));     // 1/(1 - e^{-1})
    double u_exact = 1.0 / (2.0 * (std::exp(1.0) - 1.0));
    CHECK(std::abs(sh.p0[0] - p0_exact) <= 1e-9);
    CHECK(std::abs(sh.orbit.states.back().u - u_exact) <= 1e-9);
}

TEST_CASE("shoot: pendulum lands and the dual relation holds along the orbit") {
    LagrangianModel lag = mechanical_model(1.0, 1);  // H = p^2/2 + cos x
    HamiltonianModel ham = make_hamiltonian(lag);

    direct::MinimizeOptions opts;
    opts.N = 64;
    direct::MinimizeResult warm =
        direct::minimize(lag, scalar1(0.0), scalar1(M_PI), 1.0, 0.0, opts);
    Vector p_init = dual_arc_start(dual_arc(lag, warm.path, warm.trace));

    ShootResult sh = shoot(ham, scalar1(0.0), scalar1(M_PI), 1.0, 0.0, p_init, 1024);
    CHECK(sh.miss <= 1e-9 * (1.0 + M_PI));
    for (size_t i = 0; i < sh.orbit.states.size(); i += 32) {
        const ContactState& s = sh.orbit.states[i];
        Vector v = ham.grad_p(s.x, s.u, s.p);          // xi' along the orbit
        Vector lv = lag.grad_v(s.x, s.u, v);           // L_v at that velocity
        CHECK((lv - s.p).lpNorm<Eigen::Infinity>() <= 1e-7);
    }
}

TEST_CASE("dual_arc: unit-speed line has constant momentum, reversal flips it") {
    LagrangianModel lag = quadratic_free_model(1);
    DiscretePath fwd = DiscretePath::straight(scalar1(0.0), scalar1(1.0), 1.0, 32);
    auto arc = dual_arc(lag, fwd, solve(lag, fwd, 0.0));
    for (const auto& p : arc) CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));

    DiscretePath rev = DiscretePath::straight(scalar1(1.0), scalar1(0.0), 1.0, 32);
    auto arc_rev = dual_arc(lag, rev, solve(lag, rev, 0.0));
    for (const auto& p : arc_rev) CHECK(p[0] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("dual_arc: discounted minimizer reproduces the closed-form momentum") {
    LagrangianModel lag = discounted_model(1.0, 1);
    direct::MinimizeOptions opts;
    opts.N = 256;
    direct::MinimizeResult res = direct::minimize(lag, scalar1(0.0), scalar1(1.0), 1.0, 0.0, opts);
    REQUIRE(res.converged);
    auto arc = dual_arc(lag, res.path, res.trace);
    testutil::DiscountedExtremal ex{1.0, 0.0, 1.0, 1.0, 0.0};
    for (int k = 0; k < 256; k += 8) {
        double mid = (k + 0.5) / 256.0;
        CHECK(std::abs(arc[k][0] - ex.p(mid)) <= 1e-5);
    }
}

TEST_CASE("dual_arc: flowing from the extrapolated start reproduces the path") {
    LagrangianModel lag = discounted_model(1.0, 1);
    HamiltonianModel ham = make_hamiltonian(lag);
    direct::MinimizeOptions opts;
    opts.N = 256;
    direct::MinimizeResult res = direct::minimize(lag, scalar1(0.0), scalar1(1.0), 1.0, 0.0, opts);
    Vector p0 = dual_arc_start(dual_arc(lag, res.path, res.trace));
    FlowResult orbit = flow(ham, {scalar1(0.0), p0, 0.0}, 1.0, 256);
    double sup = 0.0;
    for (size_t i = 0; i < orbit.states.size(); ++i) {
        double s = i * orbit.dt;
        sup = std::max(sup, std::abs(orbit.states[i].x[0] - res.path.position(s)[0]));
    }
    CHECK(sup <= 1e-3);  // O(1/N^2) agreement at N = 256
    CHECK(std::abs(orbit.states.back().x[0] - 1.0) <= 1e-3);
}

TEST_CASE("property: contact energy identity dH/ds = -H_u H along orbits") {
    struct Case {
        LagrangianModel lag;
        ContactState start;
    };
    std::vector<Case> cases;
    cases.push_back({quadratic_free_model(1), {scalar1(0.0), scalar1(1.1), 0.2}});
    cases.push_back({mechanical_model(1.0, 1), {scalar1(0.4), scalar1(1.3), -0.1}});
    cases.push_back({discounted_model(1.0, 1), {scalar1(0.0), scalar1(0.9), 0.3}});
    cases.push_back({bounded_contact_model(0.5, 1), {scalar1(0.2), scalar1(1.0), 0.1}});
    for (const auto& c : cases) {
        HamiltonianModel ham = make_hamiltonian(c.lag);
        FlowResult orbit = flow(ham, c.start, 1.0, 2048);
        std::vector<double> h_vals, h_rhs;
        for (const auto& s : orbit.states) {
            HamiltonianEval he = ham.eval_all(s.x, s.u, s.p);
            h_vals.push_back(he.value);
            h_rhs.push_back(-he.du * he.value);
        }
        double drift = (h_vals.back() - h_vals.front()) - simpson(h_rhs, orbit.dt);
        CHECK(std::abs(drift) <= 1e-6);
    }
}

TEST_CASE("property: flow semigroup under mixed resolutions") {
    HamiltonianModel ham = make_hamiltonian(bounded_contact_model(0.5, 1));
    ContactState start{scalar1(0.1), scalar1(1.2), 0.4};
    FlowResult whole = flow(ham, start, 1.0, 1024);
    FlowResult first = flow(ham, start, 0.4, 512);
    FlowResult second = flow(ham, first.states.back(), 0.6, 512);
    const ContactState& a = whole.states.back();
    const ContactState& b = second.states.back();
    CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK((a.p - b.p).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(std::abs(a.u - b.u) <= 1e-9);
}

TEST_CASE("property: u increments equal the quadrature of p.x' - H") {
    HamiltonianModel ham = make_hamiltonian(mechanical_model(1.0, 1));
    FlowResult orbit = flow(ham, {scalar1(0.2), scalar1(1.5), 0.0}, 1.0, 2048);
    std::vector<double> integrand;
    for (const auto& s : orbit.states) {
        HamiltonianEval he = ham.eval_all(s.x, s.u, s.p);
        integrand.push_back(s.p.dot(he.grad_p) - he.value);
    }
    double delta = orbit.states.back().u - orbit.states.front().u;
    CHECK(std::abs(delta - simpson(integrand, orbit.dt)) <= 1e-8);
}
