#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace herglotz::lbfgs {

struct Options {
    int memory = 10;
    int max_iters = 1000;
    double c1 = 1e-4;  // sufficient decrease
    double c2 = 0.9;   // curvature
    int max_linesearch = 60;
};

enum class Status { Converged, MaxIterations, LineSearchFailed };

struct Result {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd grad;
    int iterations = 0;
    Status status = Status::MaxIterations;
    std::vector<double> f_history;  // accepted iterates, including the start
};

/// Objective returns f(x) and fills grad.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Stop test examined after every accepted iterate (and at the start).
using StopTest = std::function<bool(double f, const Eigen::VectorXd& grad)>;

/// Limited-memory BFGS with a strong-Wolfe line search.
Result minimize(const Objective& objective, const Eigen::VectorXd& x0, const Options& opts,
                const StopTest& stop);

}  // namespace herglotz::lbfgs
