#include "herglotz/value.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "herglotz/io.hpp"

namespace herglotz::value {

using nlohmann::json;

long ValueTable::x_cells() const {
    long n = 1;
    for (const auto& ax : x_axes) n *= ax.count;
    return n;
}

Vector ValueTable::x_at(long flat) const {
    Vector x(dim());
    for (int a = dim() - 1; a >= 0; --a) {
        x[a] = x_axes[a].at(static_cast<int>(flat % x_axes[a].count));
        flat /= x_axes[a].count;
    }
    return x;
}

long ValueTable::flat_of(const std::vector<int>& idx) const {
    long flat = 0;
    for (int a = 0; a < dim(); ++a) flat = flat * x_axes[a].count + idx[a];
    return flat;
}

namespace {

struct CellOutcome {
    double h = std::numeric_limits<double>::quiet_NaN();
    std::uint8_t status = CellError;
    DiscretePath path;
    bool has_path = false;
};

CellOutcome build_cell(const LagrangianModel& lag, const Vector& x0, double u0, double t,
                       const Vector& x_target, const TableOptions& opts,
                       const DiscretePath* warm) {
    direct::MinimizeOptions mo = opts.minimize;
    if (warm && opts.warm_start) mo.init = *warm;
    CellOutcome out;
    try {
        direct::MinimizeResult r = direct::minimize(lag, x0, x_target, t, u0, mo);
        out.h = u0 + r.action;
        out.status = r.converged ? CellOk : CellNotConverged;
        out.path = std::move(r.path);
        out.has_path = true;
    } catch (const Error&) {
        out.status = CellError;
    }
    return out;
}

// One x-column: sweep t ascending, warm-starting from the previous minimizer
// rescaled in time (node positions carry over, the grid stretches).
void build_column(const LagrangianModel& lag, const Vector& x0, double u0,
                  const std::vector<double>& t_grid, const TableOptions& opts,
                  const Vector& x_target, std::vector<double>& h_out,
                  std::vector<std::uint8_t>& status_out) {
    const DiscretePath* warm = nullptr;
    DiscretePath prev;
    for (size_t ti = 0; ti < t_grid.size(); ++ti) {
        CellOutcome cell = build_cell(lag, x0, u0, t_grid[ti], x_target, opts, warm);
        h_out[ti] = cell.h;
        status_out[ti] = cell.status;
        if (cell.has_path) {
            prev = std::move(cell.path);
            warm = &prev;
        }
    }
}

}  // namespace

ValueTable build_table(const LagrangianModel& lag, const Vector& x0, double u0,
                       const std::vector<double>& t_grid, const std::vector<AxisGrid>& x_axes,
                       const TableOptions& opts) {
    if (t_grid.empty() || x_axes.empty()) throw Error("build_table: empty grid");
    for (double t : t_grid)
        if (!(t > 0.0)) throw Error("build_table: t_grid must be positive");

    ValueTable table;
    table.x0 = x0;
    table.u0 = u0;
    table.t_grid = t_grid;
    table.x_axes = x_axes;
    table.model_label = opts.model_label.empty() ? lag.name : opts.model_label;
    const long nx = table.x_cells();
    const long nt = static_cast<long>(t_grid.size());
    table.h.assign(nt * nx, std::numeric_limits<double>::quiet_NaN());
    table.status.assign(nt * nx, CellError);

    auto run_range = [&](long xi_begin, long xi_end) {
        std::vector<double> column_h(nt);
        std::vector<std::uint8_t> column_status(nt);
        for (long xi = xi_begin; xi < xi_end; ++xi) {
            build_column(lag, x0, u0, t_grid, opts, table.x_at(xi), column_h, column_status);
            for (long ti = 0; ti < nt; ++ti) {
                table.h[table.index(static_cast<int>(ti), xi)] = column_h[ti];
                table.status[table.index(static_cast<int>(ti), xi)] = column_status[ti];
            }
        }
    };

    int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || nx == 1) {
        run_range(0, nx);
    } else {
        jobs = static_cast<int>(std::min<long>(jobs, nx));
        std::vector<std::thread> pool;
        long chunk = (nx + jobs - 1) / jobs;
        for (int j = 0; j < jobs; ++j) {
            long a = j * chunk, b = std::min(nx, a + chunk);
            if (a >= b) break;
            pool.emplace_back(run_range, a, b);
        }
        for (auto& th : pool) th.join();
    }
    return table;
}

double rebuild_cell(const LagrangianModel& lag, const Vector& x0, double u0,
                    const std::vector<double>& t_grid, const std::vector<AxisGrid>& x_axes,
                    const TableOptions& opts, int ti, long xi) {
    ValueTable probe;
    probe.x0 = x0;
    probe.x_axes = x_axes;
    std::vector<double> head(t_grid.begin(), t_grid.begin() + ti + 1);
    std::vector<double> h_out(head.size());
    std::vector<std::uint8_t> status_out(head.size());
    build_column(lag, x0, u0, head, opts, probe.x_at(xi), h_out, status_out);
    return h_out[ti];
}

direct::TestReport check_equivalence(const LagrangianModel& lag, const ValueTable& table,
                                     const direct::MinimizeResult& result,
                                     const direct::MinimizeOptions& opts) {
    direct::TestReport rep;
    const DiscretePath& path = result.path;
    const int N = path.cells();
    const double t = path.t_final;
    const double u0 = table.u0;

    // Split indices keep both halves above the minimum cell count.
    std::vector<int> splits;
    for (int i = 1; i <= 5; ++i) {
        int k = static_cast<int>(std::lround(static_cast<double>(i) * N / 6.0));
        k = std::clamp(k, 8, N - 8);
        if (splits.empty() || splits.back() != k) splits.push_back(k);
    }

    for (int k : splits) {
        double s = k * path.h();
        Vector xs = path.node(k);
        double u_s = result.trace.u[k];

        // Restrictions of the minimizer provide warm starts.
        DiscretePath head;
        head.t_final = s;
        head.x0 = path.x0;
        head.x1 = xs;
        for (int j = 1; j < k; ++j) head.nodes.push_back(path.node(j));

        DiscretePath tail;
        tail.t_final = t - s;
        tail.x0 = xs;
        tail.x1 = path.x1;
        for (int j = k + 1; j < N; ++j) tail.nodes.push_back(path.node(j));

        direct::MinimizeOptions mo = opts;
        mo.N = k;
        mo.init = head;
        direct::MinimizeResult head_min = direct::minimize(lag, path.x0, xs, s, u0, mo);

        mo.N = N - k;
        mo.init = tail;
        direct::MinimizeResult tail_min =
            direct::minimize(lag, xs, path.x1, t - s, u_s, mo);

        // h(s, xi(s)) = u_xi(s): fresh value at the split matches the trace.
        double err_value = std::abs((u0 + head_min.action) - u_s);
        // Concatenation: total value equals head value plus tail action.
        double err_concat = std::abs((u_s + tail_min.action) - result.trace.u[N]);

        double tol_value = 1e-5 * (1.0 + std::abs(u_s));
        double tol_concat = 1e-5 * (1.0 + std::abs(result.trace.u[N]));
        rep.worst = std::max({rep.worst, err_value / tol_value, err_concat / tol_concat});
        if (err_value > tol_value || err_concat > tol_concat) {
            rep.pass = false;
            rep.note = "dynamic-programming identity violated at split " + std::to_string(k);
        }
    }
    return rep;
}

HJResidual hj_residual(const ValueTable& table, const HamiltonianModel& ham) {
    const long nt = static_cast<long>(table.t_grid.size());
    const long nx = table.x_cells();
    const int dim = table.dim();
    if (nt < 3) throw Error("hj_residual: need at least 3 time samples");
    double dt = table.t_grid[1] - table.t_grid[0];
    for (long i = 1; i + 1 < nt; ++i)
        if (std::abs(table.t_grid[i + 1] - table.t_grid[i] - dt) > 1e-12 * (1.0 + dt))
            throw Error("hj_residual: t_grid must be uniform");

    HJResidual out;
    out.r.assign(nt * nx, std::numeric_limits<double>::quiet_NaN());
    out.smooth.assign(nt * nx, 0);

    std::vector<long> stride(dim, 1);
    for (int a = dim - 2; a >= 0; --a) stride[a] = stride[a + 1] * table.x_axes[a + 1].count;

    auto ok = [&](long idx) { return table.status[idx] == CellOk; };

    for (long ti = 1; ti + 1 < nt; ++ti) {
        for (long xi = 0; xi < nx; ++xi) {
            std::vector<int> coords(dim);
            long rest = xi;
            bool interior = true;
            for (int a = 0; a < dim; ++a) {
                coords[a] = static_cast<int>(rest / stride[a]);
                rest %= stride[a];
                if (coords[a] == 0 || coords[a] == table.x_axes[a].count - 1) interior = false;
            }
            if (!interior) continue;

            long here = table.index(static_cast<int>(ti), xi);
            long tm = table.index(static_cast<int>(ti - 1), xi);
            long tp = table.index(static_cast<int>(ti + 1), xi);
            bool usable = ok(here) && ok(tm) && ok(tp);

            double h0 = table.h[here];
            double dt_c = (table.h[tp] - table.h[tm]) / (2.0 * dt);
            double dt_f = (table.h[tp] - h0) / dt;
            double dt_b = (h0 - table.h[tm]) / dt;
            bool smooth = std::abs(dt_f - dt_b) <= 10.0 * (std::abs(dt_c) + dt);

            Vector grad(dim);
            for (int a = 0; a < dim; ++a) {
                double dx = table.x_axes[a].step();
                long xm = table.index(static_cast<int>(ti), xi - stride[a]);
                long xp = table.index(static_cast<int>(ti), xi + stride[a]);
                usable = usable && ok(xm) && ok(xp);
                if (!usable) break;
                double c = (table.h[xp] - table.h[xm]) / (2.0 * dx);
                double f = (table.h[xp] - h0) / dx;
                double b = (h0 - table.h[xm]) / dx;
                if (std::abs(f - b) > 10.0 * (std::abs(c) + dx)) smooth = false;
                grad[a] = c;
            }
            if (!usable) continue;

            out.interior += 1;
            double res = dt_c + ham.eval(table.x_at(xi), h0, grad);
            out.r[here] = res;
            out.smooth[here] = smooth ? 1 : 0;
            if (smooth)
                out.max_smooth_abs = std::max(out.max_smooth_abs, std::abs(res));
            else
                out.flagged += 1;
        }
    }
    return out;
}

std::string serialize_table(const ValueTable& table) {
    json header;
    header["version"] = "1.0.0";
    header["model"] = table.model_label;
    header["u0"] = table.u0;
    header["x0"] = std::vector<double>(table.x0.data(), table.x0.data() + table.x0.size());
    header["t_grid"] = table.t_grid;
    json axes = json::array();
    for (const auto& ax : table.x_axes)
        axes.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"count", ax.count}});
    header["x_axes"] = axes;

    std::ostringstream ss;
    ss << header.dump() << '\n';
    ss << "t";
    for (int a = 0; a < table.dim(); ++a) ss << ",x" << a;
    ss << ",h,status\n";
    const long nx = table.x_cells();
    for (size_t ti = 0; ti < table.t_grid.size(); ++ti) {
        for (long xi = 0; xi < nx; ++xi) {
            long idx = table.index(static_cast<int>(ti), xi);
            ss << io::fmt(table.t_grid[ti]);
            Vector x = table.x_at(xi);
            for (int a = 0; a < table.dim(); ++a) ss << ',' << io::fmt(x[a]);
            ss << ',' << io::fmt(table.h[idx]) << ',' << static_cast<int>(table.status[idx])
               << '\n';
        }
    }
    return ss.str();
}

ValueTable parse_table(const std::string& text) {
    size_t nl = text.find('\n');
    if (nl == std::string::npos) throw Error("table parse: missing header");
    json header = json::parse(text.substr(0, nl));

    ValueTable table;
    table.model_label = header.at("model").get<std::string>();
    table.u0 = header.at("u0").get<double>();
    auto x0 = header.at("x0").get<std::vector<double>>();
    table.x0 = Eigen::Map<const Vector>(x0.data(), x0.size());
    table.t_grid = header.at("t_grid").get<std::vector<double>>();
    for (const auto& ax : header.at("x_axes"))
        table.x_axes.push_back(
            {ax.at("lo").get<double>(), ax.at("hi").get<double>(), ax.at("count").get<int>()});

    const long nx = table.x_cells();
    table.h.assign(table.t_grid.size() * nx, 0.0);
    table.status.assign(table.t_grid.size() * nx, CellError);

    auto rows = io::read_csv(text.substr(nl + 1));
    if (rows.empty()) throw Error("table parse: missing body");
    long expected = static_cast<long>(table.t_grid.size()) * nx;
    if (static_cast<long>(rows.size()) - 1 != expected)
        throw Error("table parse: row count mismatch");
    for (long i = 0; i < expected; ++i) {
        const auto& row = rows[i + 1];
        long ti = i / nx, xi = i % nx;
        long idx = table.index(static_cast<int>(ti), xi);
        table.h[idx] = io::parse_double(row[1 + table.dim()]);
        table.status[idx] = static_cast<std::uint8_t>(std::stoi(row[2 + table.dim()]));
    }
    return table;
}

void save_table(const ValueTable& table, const std::string& path) {
    io::write_text_file(path, serialize_table(table));
}

ValueTable load_table(const std::string& path) {
    return parse_table(io::read_text_file(path));
}

}  // namespace herglotz::value
