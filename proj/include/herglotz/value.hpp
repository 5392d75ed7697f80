#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "herglotz/direct.hpp"

namespace herglotz::value {

struct AxisGrid {
    double lo = 0.0, hi = 0.0;
    int count = 0;

    double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
    double step() const { return count > 1 ? (hi - lo) / (count - 1) : 0.0; }
};

enum CellStatus : std::uint8_t { CellOk = 0, CellNotConverged = 1, CellError = 2 };

/// Fundamental-solution samples h(t, x) = u0 + min action from (x0, u0) over
/// a rectangular (t, x) lattice; values stored t-major.
struct ValueTable {
    Vector x0;
    double u0 = 0.0;
    std::vector<double> t_grid;
    std::vector<AxisGrid> x_axes;
    std::vector<double> h;
    std::vector<std::uint8_t> status;
    std::string model_label;

    int dim() const { return static_cast<int>(x_axes.size()); }
    long x_cells() const;
    long index(int ti, long xi) const { return static_cast<long>(ti) * x_cells() + xi; }
    Vector x_at(long flat) const;
    long flat_of(const std::vector<int>& idx) const;
};

struct TableOptions {
    direct::MinimizeOptions minimize;
    bool warm_start = true;  // initialize each cell from its left time-neighbor
    int jobs = 1;
    std::string model_label;
};

/// Builds the table cell by cell with direct::minimize.  Failures are marked
/// in status, never silently filled.  Deterministic for any jobs count: the
/// warm-start chain runs along t within each x-column and columns are
/// independent.
ValueTable build_table(const LagrangianModel& lag, const Vector& x0, double u0,
                       const std::vector<double>& t_grid, const std::vector<AxisGrid>& x_axes,
                       const TableOptions& opts);

/// Replays the warm-start chain of one x-column up to time index ti and
/// returns the cell value; bitwise equal to the tabulated one.
double rebuild_cell(const LagrangianModel& lag, const Vector& x0, double u0,
                    const std::vector<double>& t_grid, const std::vector<AxisGrid>& x_axes,
                    const TableOptions& opts, int ti, long xi);

/// Checks the dynamic-programming identities along a minimizer: at 5 split
/// times, a fresh minimization to xi(s) reproduces u_xi(s), and the
/// concatenation identity holds.  Tolerance 1e-5 * (1 + |u|).
direct::TestReport check_equivalence(const LagrangianModel& lag, const ValueTable& table,
                                     const direct::MinimizeResult& result,
                                     const direct::MinimizeOptions& opts);

struct HJResidual {
    std::vector<double> r;            // per cell; NaN outside the interior
    std::vector<std::uint8_t> smooth; // 1 where central differences are trusted
    double max_smooth_abs = 0.0;
    long interior = 0;
    long flagged = 0;
};

/// Central-difference residual D_t h + H(x, h, D_x h) at interior cells.
/// Cells where one-sided differences disagree with the central estimate by
/// more than a factor 10 are flagged non-smooth and excluded.
HJResidual hj_residual(const ValueTable& table, const HamiltonianModel& ham);

/// JSON header plus CSV body; the round-trip is bit-exact.
std::string serialize_table(const ValueTable& table);
ValueTable parse_table(const std::string& text);
void save_table(const ValueTable& table, const std::string& path);
ValueTable load_table(const std::string& path);

}  // namespace herglotz::value
