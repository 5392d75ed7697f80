#include "herglotz/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "herglotz/characteristics.hpp"
#include "herglotz/direct.hpp"
#include "herglotz/io.hpp"
#include "herglotz/oracle.hpp"
#include "herglotz/value.hpp"

namespace herglotz::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool wants(const ExperimentConfig& cfg, const std::string& fmt) {
    for (const auto& f : cfg.formats)
        if (f == fmt) return true;
    return false;
}

std::string plotdata(const std::vector<std::pair<double, double>>& rows) {
    std::ostringstream ss;
    for (const auto& [a, b] : rows) ss << io::fmt(a) << ' ' << io::fmt(b) << '\n';
    return ss.str();
}

struct TaskContext {
    const ExperimentConfig& cfg;
    LagrangianModel lag;
    json metrics = json::object();
    json invariants = json::object();
    std::vector<std::string> files;

    void emit(const std::string& name, const std::string& content) {
        io::write_text_file((fs::path(cfg.out_dir) / name).string(), content);
        files.push_back(name);
    }
};

direct::MinimizeOptions minimize_options(const ExperimentConfig& cfg) {
    direct::MinimizeOptions mo;
    mo.N = cfg.N;
    mo.gtol = cfg.gtol;
    mo.multistart = cfg.multistart;
    mo.seed = cfg.seed;
    return mo;
}

std::string path_csv(const DiscretePath& path) {
    std::ostringstream ss;
    const int dim = static_cast<int>(path.x0.size());
    ss << "s";
    for (int i = 0; i < dim; ++i) ss << ",x" << i;
    ss << '\n';
    for (int k = 0; k <= path.cells(); ++k) {
        ss << io::fmt(k * path.h());
        Vector x = path.node(k);
        for (int i = 0; i < dim; ++i) ss << ',' << io::fmt(x[i]);
        ss << '\n';
    }
    return ss.str();
}

void task_minimize(TaskContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    direct::MinimizeResult res =
        direct::minimize(ctx.lag, cfg.x0, cfg.x1, cfg.t, cfg.u0, minimize_options(cfg));

    ctx.metrics["action"] = res.action;
    ctx.metrics["grad_inf_norm"] = res.grad_inf_norm;
    ctx.metrics["erdmann_spread"] = res.erdmann_spread;
    ctx.metrics["herglotz_residual"] = res.herglotz_residual;
    ctx.metrics["iterations"] = res.iterations;
    ctx.metrics["converged"] = res.converged;

    double gtol_eff = cfg.gtol * (1.0 + std::abs(res.action));
    double tol_e = direct::erdmann_tolerance(ctx.lag, cfg.t, cfg.N, gtol_eff);
    ctx.invariants["converged"] = res.converged;
    ctx.invariants["erdmann_spread_within_tol"] = res.erdmann_spread <= tol_e;
    ctx.invariants["gronwall_lower_bound"] =
        check_lower_bound(res.trace, ctx.lag).pass;

    if (wants(cfg, "csv")) {
        ctx.emit("path.csv", path_csv(res.path));
        ctx.emit("trace.csv", trace_csv(ctx.lag, res.path, res.trace));
    }
    if (wants(cfg, "plotdata")) {
        std::vector<std::pair<double, double>> rows;
        for (int k = 0; k <= res.path.cells(); ++k)
            rows.emplace_back(k * res.path.h(), res.trace.u[k]);
        ctx.emit("u_of_s.plotdata", plotdata(rows));
    }
}

void task_shoot(TaskContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    HamiltonianModel ham = make_hamiltonian(ctx.lag);

    // Warm start from the direct-method dual arc.
    direct::MinimizeOptions mo = minimize_options(ctx.cfg);
    mo.N = std::max(16, std::min(cfg.N, 64));
    direct::MinimizeResult warm =
        direct::minimize(ctx.lag, cfg.x0, cfg.x1, cfg.t, cfg.u0, mo);
    Vector p_init = characteristics::dual_arc_start(
        characteristics::dual_arc(ctx.lag, warm.path, warm.trace));

    characteristics::ShootResult sh =
        characteristics::shoot(ham, cfg.x0, cfg.x1, cfg.t, cfg.u0, p_init, cfg.steps);

    const auto& end = sh.orbit.states.back();
    ctx.metrics["terminal_u"] = end.u;
    ctx.metrics["terminal_miss"] = sh.miss;
    ctx.metrics["newton_iterations"] = sh.newton_iterations;
    json p0 = json::array();
    for (int i = 0; i < sh.p0.size(); ++i) p0.push_back(sh.p0[i]);
    ctx.metrics["p0"] = p0;
    ctx.metrics["flow_error_estimate"] = sh.orbit.error_estimate;

    ctx.invariants["landed"] = sh.miss <= 1e-9 * (1.0 + cfg.x1.norm());
    ctx.invariants["flow_refined"] = !sh.orbit.refinement_warning;

    if (wants(cfg, "csv")) ctx.emit("orbit.csv", characteristics::orbit_csv(ham, sh.orbit));
    if (wants(cfg, "plotdata")) {
        std::vector<std::pair<double, double>> rows;
        for (size_t k = 0; k < sh.orbit.states.size(); ++k)
            rows.emplace_back(k * sh.orbit.dt, sh.orbit.states[k].u);
        ctx.emit("u_of_s.plotdata", plotdata(rows));
    }
}

void task_table(TaskContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    value::TableOptions topts;
    topts.minimize = minimize_options(cfg);
    topts.jobs = cfg.jobs;
    topts.model_label = cfg.model_name;

    const int dim = static_cast<int>(cfg.x0.size());
    std::vector<value::AxisGrid> axes(dim,
                                      {cfg.x_grid->lo, cfg.x_grid->hi, cfg.x_grid->count});
    value::ValueTable table =
        value::build_table(ctx.lag, cfg.x0, cfg.u0, cfg.t_grid->values(), axes, topts);

    long ok = 0;
    for (auto s : table.status) ok += s == value::CellOk;
    ctx.metrics["cells"] = static_cast<long>(table.h.size());
    ctx.metrics["cells_converged"] = ok;
    ctx.invariants["all_cells_converged"] = ok == static_cast<long>(table.h.size());

    ctx.emit("table.dat", value::serialize_table(table));
    if (wants(cfg, "plotdata") && dim == 1) {
        std::vector<std::pair<double, double>> rows;
        int last_t = static_cast<int>(table.t_grid.size()) - 1;
        for (long xi = 0; xi < table.x_cells(); ++xi)
            rows.emplace_back(table.x_at(xi)[0], table.h[table.index(last_t, xi)]);
        ctx.emit("h_of_x.plotdata", plotdata(rows));
    }
}

void task_invariants(TaskContext& ctx) {
    auto battery = run_invariant_battery(ctx.lag, ctx.cfg.seed);
    for (const auto& [name, outcome] : battery) {
        ctx.invariants[name] = outcome.pass;
        ctx.metrics[name + "_worst"] = outcome.value;
    }
}

void task_compare(TaskContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    direct::MinimizeResult res =
        direct::minimize(ctx.lag, cfg.x0, cfg.x1, cfg.t, cfg.u0, minimize_options(cfg));
    double u_direct = cfg.u0 + res.action;

    HamiltonianModel ham = make_hamiltonian(ctx.lag);
    Vector p_init = characteristics::dual_arc_start(
        characteristics::dual_arc(ctx.lag, res.path, res.trace));
    characteristics::ShootResult sh =
        characteristics::shoot(ham, cfg.x0, cfg.x1, cfg.t, cfg.u0, p_init, cfg.steps);
    double u_shoot = sh.orbit.states.back().u;

    ctx.metrics["direct"] = u_direct;
    ctx.metrics["shooting"] = u_shoot;
    double worst = std::abs(u_direct - u_shoot);

    // The closed form covers the quadratic kinetic models.
    std::optional<double> u_oracle;
    if (cfg.model_name == "discounted")
        u_oracle = oracle::discounted_value(oracle::L0Kind::QuadraticFree,
                                            ctx.lag.params.at("lambda"), cfg.x0, cfg.x1, cfg.t,
                                            cfg.u0);
    else if (cfg.model_name == "quadratic-free")
        u_oracle =
            oracle::discounted_value(oracle::L0Kind::QuadraticFree, 0.0, cfg.x0, cfg.x1, cfg.t,
                                     cfg.u0);
    if (u_oracle) {
        ctx.metrics["oracle"] = *u_oracle;
        worst = std::max({worst, std::abs(u_direct - *u_oracle),
                          std::abs(u_shoot - *u_oracle)});
    }
    ctx.metrics["max_disagreement"] = worst;
    ctx.invariants["agreement"] = worst <= 1e-5;
    ctx.invariants["converged"] = res.converged;
}

}  // namespace

std::string list_models(const ModelRegistry& registry) {
    std::ostringstream ss;
    for (const auto& info : registry.list()) {
        ss << info.name;
        ss << std::string(info.name.size() < 20 ? 20 - info.name.size() : 1, ' ');
        ss << "params:";
        if (info.params.empty()) ss << " (none)";
        for (const auto& [pname, pdefault] : info.params)
            ss << ' ' << pname << '=' << io::fmt(pdefault);
        ss << "  conditions: " << info.conditions << '\n';
    }
    return ss.str();
}

int run(const std::string& config_path, const RunOverrides& overrides) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (e.line > 0) std::cerr << " at line " << e.line;
        if (!e.key.empty()) std::cerr << " (key '" << e.key << "')";
        std::cerr << ": " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
    if (overrides.jobs) cfg.jobs = *overrides.jobs;
    if (overrides.seed) cfg.seed = *overrides.seed;

    fs::create_directories(cfg.out_dir);
    auto t_start = std::chrono::steady_clock::now();

    TaskContext ctx{cfg, {}, {}, {}, {}};
    std::string status = "ok";
    try {
        const int dim = cfg.x0.size() > 0 ? static_cast<int>(cfg.x0.size()) : 1;
        ctx.lag = ModelRegistry::builtins().make(cfg.model_name, cfg.model_params, dim);
        if (cfg.task == "minimize") task_minimize(ctx);
        else if (cfg.task == "shoot") task_shoot(ctx);
        else if (cfg.task == "table") task_table(ctx);
        else if (cfg.task == "invariants") task_invariants(ctx);
        else if (cfg.task == "compare") task_compare(ctx);
    } catch (const Error& e) {
        status = std::string("numeric_failure: ") + e.what();
    }

    bool all_pass = status == "ok";
    for (const auto& [name, pass] : ctx.invariants.items())
        all_pass = all_pass && pass.get<bool>();

    json manifest;
    manifest["version"] = kVersion;
    manifest["task"] = cfg.task;
    manifest["config"] = cfg.echo;
    manifest["seed"] = cfg.seed;
    manifest["metrics"] = ctx.metrics;
    manifest["invariants"] = ctx.invariants;
    manifest["files"] = ctx.files;
    manifest["status"] = status;
    manifest["all_checks_pass"] = all_pass;
    io::write_text_file((fs::path(cfg.out_dir) / "manifest.json").string(),
                        manifest.dump(2) + "\n");

    // Wall time lives outside the manifest so reruns stay byte-identical.
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t_start)
                  .count();
    io::write_text_file((fs::path(cfg.out_dir) / "timing.txt").string(),
                        "wall_ms " + std::to_string(ms) + "\n");

    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Invariant battery

namespace {

struct Sampler {
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> unit{-1.0, 1.0};

    double scalar(double half) { return half * unit(rng); }
    Vector vec(int dim, double half) {
        Vector v(dim);
        for (int i = 0; i < dim; ++i) v[i] = half * unit(rng);
        return v;
    }
};

DiscretePath random_path(Sampler& s, int dim, double amp) {
    int N = 8 + static_cast<int>(std::abs(s.scalar(8.0)));
    double t = 0.3 + std::abs(s.scalar(1.7));
    DiscretePath p = DiscretePath::straight(s.vec(dim, 2.0), s.vec(dim, 2.0), t, N);
    for (auto& node : p.nodes) node += s.vec(dim, amp);
    return p;
}

}  // namespace

std::map<std::string, InvariantOutcome> run_invariant_battery(const LagrangianModel& lag,
                                                              std::uint64_t seed) {
    std::map<std::string, InvariantOutcome> out;
    const int dim = lag.dim;
    HamiltonianModel ham = make_hamiltonian(lag);
    Sampler s{std::mt19937_64(seed)};

    {  // declared conditions hold on the sampling box
        ConditionReport rep =
            check_conditions(lag, SampleBox::cube(dim, 1.0, 2.0, 1.0), 1000, seed);
        out["conditions"] = {rep.all_pass(), rep.l2.worst};
    }

    {  // Fenchel-Young: equality at v = H_p, inequality elsewhere
        double worst = 0.0;
        bool pass = true;
        for (int i = 0; i < 1000; ++i) {
            Vector x = s.vec(dim, 1.0), p = s.vec(dim, 2.0);
            double u = s.scalar(1.0);
            HamiltonianEval he = ham.eval_all(x, u, p);
            double lhs = p.dot(he.grad_p);
            double rhs = lag.eval(x, u, he.grad_p) + he.value;
            double scale = 1.0 + std::abs(he.value) + std::abs(rhs);
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
            Vector v = s.vec(dim, 2.0);
            if (p.dot(v) > lag.eval(x, u, v) + he.value + 1e-9 * scale) pass = false;
        }
        out["fenchel_young"] = {pass && worst <= 1e-8, worst};
    }

    {  // double Legendre transform recovers L
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            Vector x = s.vec(dim, 1.0), v = s.vec(dim, 1.5);
            double u = s.scalar(1.0);
            LagrangianModel dual;  // H viewed as a Lagrangian in p
            dual.dim = dim;
            dual.eval = [&](const Vector& xx, double uu, const Vector& p) {
                return ham.eval(xx, uu, p);
            };
            dual.grad_v = [&](const Vector& xx, double uu, const Vector& p) {
                return ham.grad_p(xx, uu, p);
            };
            dual.hess_vv = [&](const Vector& xx, double uu, const Vector& p) {
                Matrix hess(dim, dim);
                for (int j = 0; j < dim; ++j) {
                    double dp = 1e-6 * (1.0 + std::abs(p[j]));
                    Vector pa = p, pb = p;
                    pa[j] += dp;
                    pb[j] -= dp;
                    hess.col(j) = (ham.grad_p(xx, uu, pa) - ham.grad_p(xx, uu, pb)) / (2.0 * dp);
                }
                return ((hess + hess.transpose()) / 2.0).eval();
            };
            LegendreResult back = legendre_transform(dual, x, u, v, v);
            double l = lag.eval(x, u, v);
            worst = std::max(worst, std::abs(back.value - l) / (1.0 + std::abs(l)));
        }
        out["double_transform"] = {worst <= 1e-7, worst};
    }

    {  // analytic partials vs central differences
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            Vector x = s.vec(dim, 1.0), v = s.vec(dim, 2.0);
            double u = s.scalar(1.0);
            double scale =
                1.0 + lag.grad_x(x, u, v).norm() + lag.grad_v(x, u, v).norm() +
                std::abs(lag.du(x, u, v));
            for (int j = 0; j < dim; ++j) {
                double dx = 1e-5 * (1.0 + std::abs(x[j]));
                Vector xa = x, xb = x;
                xa[j] += dx;
                xb[j] -= dx;
                double fd = (lag.eval(xa, u, v) - lag.eval(xb, u, v)) / (2.0 * dx);
                worst = std::max(worst, std::abs(fd - lag.grad_x(x, u, v)[j]) / scale);
                double dv = 1e-5 * (1.0 + std::abs(v[j]));
                Vector va = v, vb = v;
                va[j] += dv;
                vb[j] -= dv;
                fd = (lag.eval(x, u, va) - lag.eval(x, u, vb)) / (2.0 * dv);
                worst = std::max(worst, std::abs(fd - lag.grad_v(x, u, v)[j]) / scale);
            }
            double du_step = 1e-5 * (1.0 + std::abs(u));
            double fd = (lag.eval(x, u + du_step, v) - lag.eval(x, u - du_step, v)) /
                        (2.0 * du_step);
            worst = std::max(worst, std::abs(fd - lag.du(x, u, v)) / scale);
        }
        out["partials_fd"] = {worst <= 1e-5, worst};
    }

    {  // Gronwall lower bound on randomized trials
        double worst_margin = std::numeric_limits<double>::infinity();
        bool pass = true;
        for (int i = 0; i < 1000; ++i) {
            DiscretePath p = random_path(s, dim, 1.0);
            double u0 = s.scalar(5.0);
            BoundReport rep = check_lower_bound(solve(lag, p, u0), lag);
            worst_margin = std::min(worst_margin, rep.margin);
            pass = pass && rep.pass;
        }
        out["gronwall_trials"] = {pass, worst_margin};
    }

    {  // monotone, Gronwall-stable dependence on u0
        double worst = 0.0;
        bool pass = true;
        for (int i = 0; i < 100; ++i) {
            DiscretePath p = random_path(s, dim, 0.5);
            double a = s.scalar(3.0), b = s.scalar(3.0);
            double lo = std::min(a, b), hi = std::max(a, b);
            double u_lo = solve(lag, p, lo).u[p.cells()];
            double u_hi = solve(lag, p, hi).u[p.cells()];
            if (u_hi < u_lo - 1e-12) pass = false;
            double bound = std::exp(lag.K * p.t_final) * (hi - lo);
            worst = std::max(worst, (u_hi - u_lo) - bound);
            if (u_hi - u_lo > bound * (1.0 + 1e-12) + 1e-12) pass = false;
        }
        out["monotone_u0"] = {pass, worst};
    }

    return out;
}

}  // namespace herglotz::cli
