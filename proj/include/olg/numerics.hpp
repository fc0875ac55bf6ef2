#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace olg::numerics {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using VectorFunction = std::function<Vector(const Vector&)>;
using JacobianFunction = std::function<Matrix(const Vector&)>;
using ScalarFunction = std::function<double(const Vector&)>;

/// Solver failure carrying the best point reached.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, Vector best_x, double best_residual, int iterations)
        : std::runtime_error(what),
          best_x_(std::move(best_x)),
          best_residual_(best_residual),
          iterations_(iterations) {}

    [[nodiscard]] const Vector& best_x() const noexcept { return best_x_; }
    [[nodiscard]] double best_residual() const noexcept { return best_residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    Vector best_x_;
    double best_residual_;
    int iterations_;
};

/// Raised when a function returns NaN/inf; names the offending coordinate.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& what, Eigen::Index coordinate)
        : std::runtime_error(what), coordinate_(coordinate) {}
    [[nodiscard]] Eigen::Index coordinate() const noexcept { return coordinate_; }

private:
    Eigen::Index coordinate_;
};

enum class JacobianMode { forward_difference, secant_update };

inline const double kDefaultFdStep = std::cbrt(std::numeric_limits<double>::epsilon());

struct RootOptions {
    double tol_residual = 1e-9;  ///< max-norm of F at the returned point
    int max_iterations = 100;
    double damping_init = 1.0;
    JacobianMode jacobian_mode = JacobianMode::forward_difference;
    double fd_step = kDefaultFdStep;
};

struct RootResult {
    Vector x;
    double residual_norm = 0.0;  ///< max-norm, re-evaluated at x
    int iterations = 0;
    int function_evaluations = 0;
};

void validate(const RootOptions& opts);

/// Damped Newton with backtracking (step halved while the residual 2-norm does
/// not decrease, at most 30 halvings). When `jacobian` is empty the Jacobian is
/// built by forward differences, or updated by Broyden's rule in secant mode.
/// Deterministic: identical inputs give bit-identical outputs.
RootResult solve_root(const VectorFunction& f, const Vector& x0, const RootOptions& opts,
                      const JacobianFunction& jacobian = {});

/// Forward-difference Jacobian with relative step max(|x_i|, 1) * step.
Matrix forward_difference_jacobian(const VectorFunction& f, const Vector& x, const Vector& fx,
                                   double step);

/// Central-difference gradient with relative step max(|x_i|, 1) * step.
Vector finite_diff_gradient(const ScalarFunction& f, const Vector& x, double step = kDefaultFdStep);

struct Bound {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct MinimizeOptions {
    std::vector<Bound> bounds;  ///< one per coordinate; empty means unbounded
    double tol_gradient = 1e-8;
    int max_iterations = 500;
    double fd_step = kDefaultFdStep;
};

struct MinimizeResult {
    Vector x;
    double value = 0.0;
    double projected_gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;  ///< false when max_iterations was hit
};

/// Projected BFGS on a box with central-difference gradients and an Armijo
/// search along the projection arc.
MinimizeResult minimize_bounded(const ScalarFunction& f, const Vector& x0, const MinimizeOptions& opts);

/// Bisection on a sign change of g over [lo, hi].
double bisect(const std::function<double(double)>& g, double lo, double hi, double tol = 1e-14,
              int max_iterations = 200);

inline double max_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace olg::numerics
