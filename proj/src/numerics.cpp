#include "olg/numerics.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace olg::numerics {
namespace {

constexpr int kMaxHalvings = 30;

Eigen::Index first_non_finite(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) return i;
    }
    return -1;
}

Vector newton_direction(const Matrix& jac, const Vector& fx) {
    Eigen::PartialPivLU<Matrix> lu(jac);
    Vector dx = lu.solve(-fx);
    if (!dx.allFinite()) {
        // Singular Jacobian: fall back to a least-squares step.
        dx = jac.colPivHouseholderQr().solve(-fx);
    }
    return dx;
}

double step_for(double xi, double step) { return std::max(std::abs(xi), 1.0) * step; }

// One-sided near a bound so the objective is never evaluated outside the box.
Vector bounded_gradient(const ScalarFunction& f, const Vector& x, const std::vector<Bound>& bounds,
                        double step) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_for(x[i], step);
        const Bound b = bounds.empty() ? Bound{} : bounds[static_cast<std::size_t>(i)];
        Vector xp = x;
        Vector xm = x;
        if (x[i] + h > b.upper) {
            xm[i] = x[i] - h;
            g[i] = (f(x) - f(xm)) / h;
        } else if (x[i] - h < b.lower) {
            xp[i] = x[i] + h;
            g[i] = (f(xp) - f(x)) / h;
        } else {
            xp[i] = x[i] + h;
            xm[i] = x[i] - h;
            g[i] = (f(xp) - f(xm)) / (2.0 * h);
        }
        if (!std::isfinite(g[i])) {
            throw NonFiniteError(fmt::format("non-finite gradient component {}", i), i);
        }
    }
    return g;
}

Vector project(const Vector& x, const std::vector<Bound>& bounds) {
    if (bounds.empty()) return x;
    Vector out = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto& b = bounds[static_cast<std::size_t>(i)];
        out[i] = std::clamp(x[i], b.lower, b.upper);
    }
    return out;
}

}  // namespace

void validate(const RootOptions& opts) {
    if (!(opts.tol_residual > 0.0)) throw std::invalid_argument("RootOptions: tol_residual must be > 0");
    if (opts.max_iterations < 1) throw std::invalid_argument("RootOptions: max_iterations must be >= 1");
    if (!(opts.damping_init > 0.0 && opts.damping_init <= 1.0)) {
        throw std::invalid_argument("RootOptions: damping_init must be in (0, 1]");
    }
    if (!(opts.fd_step > 0.0)) throw std::invalid_argument("RootOptions: fd_step must be > 0");
}

Matrix forward_difference_jacobian(const VectorFunction& f, const Vector& x, const Vector& fx,
                                   double step) {
    Matrix jac(fx.size(), x.size());
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = step_for(x[j], step);
        xp[j] = x[j] + h;
        jac.col(j) = (f(xp) - fx) / h;
        xp[j] = x[j];
    }
    return jac;
}

RootResult solve_root(const VectorFunction& f, const Vector& x0, const RootOptions& opts,
                      const JacobianFunction& jacobian) {
    validate(opts);
    RootResult res;
    res.x = x0;
    Vector fx = f(res.x);
    res.function_evaluations = 1;
    if (const auto bad = first_non_finite(fx); bad >= 0) {
        throw NonFiniteError(fmt::format("solve_root: non-finite residual at coordinate {} of the initial point", bad),
                             bad);
    }
    res.residual_norm = max_norm(fx);
    if (res.residual_norm <= opts.tol_residual) return res;

    const bool secant = !jacobian && opts.jacobian_mode == JacobianMode::secant_update;
    auto fresh_jacobian = [&](const Vector& x, const Vector& fxv) {
        if (jacobian) return jacobian(x);
        res.function_evaluations += static_cast<int>(x.size());
        return forward_difference_jacobian(f, x, fxv, opts.fd_step);
    };

    Matrix jac;
    bool jac_fresh = false;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        res.iterations = iter;
        if (!secant || jac.size() == 0) {
            jac = fresh_jacobian(res.x, fx);
            jac_fresh = true;
        }

        const double merit0 = fx.squaredNorm();
        Vector dx = newton_direction(jac, fx);
        Vector x_trial;
        Vector f_trial;
        bool accepted = false;
        Eigen::Index last_bad = -1;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double lambda = opts.damping_init;
            for (int h = 0; h <= kMaxHalvings; ++h, lambda *= 0.5) {
                x_trial = res.x + lambda * dx;
                f_trial = f(x_trial);
                ++res.function_evaluations;
                last_bad = first_non_finite(f_trial);
                if (last_bad < 0 && f_trial.squaredNorm() < merit0) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted && secant && !jac_fresh) {
                // The secant model went stale; rebuild it once and retry.
                jac = fresh_jacobian(res.x, fx);
                jac_fresh = true;
                dx = newton_direction(jac, fx);
            } else {
                break;
            }
        }
        if (!accepted) {
            if (last_bad >= 0) {
                throw NonFiniteError(
                    fmt::format("solve_root: non-finite residual at coordinate {} in line search (iteration {})",
                                last_bad, iter),
                    last_bad);
            }
            throw SolverError(fmt::format("solve_root: line search failed at iteration {} (residual {:.3e})",
                                          iter, res.residual_norm),
                              res.x, res.residual_norm, iter);
        }

        if (secant) {
            const Vector s = x_trial - res.x;
            const double ss = s.squaredNorm();
            if (ss > 0.0) jac += ((f_trial - fx) - jac * s) * s.transpose() / ss;
            jac_fresh = false;
        }
        res.x = std::move(x_trial);
        fx = std::move(f_trial);
        res.residual_norm = max_norm(fx);
        if (res.residual_norm <= opts.tol_residual) return res;
    }
    throw SolverError(fmt::format("solve_root: {} iterations exceeded (residual {:.3e})", opts.max_iterations,
                                  res.residual_norm),
                      res.x, res.residual_norm, opts.max_iterations);
}

Vector finite_diff_gradient(const ScalarFunction& f, const Vector& x, double step) {
    Vector g(x.size());
    Vector xp = x;
    Vector xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_for(x[i], step);
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
        if (!std::isfinite(g[i])) {
            throw NonFiniteError(fmt::format("finite_diff_gradient: non-finite evaluation at coordinate {}", i), i);
        }
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

MinimizeResult minimize_bounded(const ScalarFunction& f, const Vector& x0, const MinimizeOptions& opts) {
    const auto n = x0.size();
    if (!opts.bounds.empty() && static_cast<Eigen::Index>(opts.bounds.size()) != n) {
        throw std::invalid_argument("minimize_bounded: bounds size does not match x0");
    }
    for (std::size_t i = 0; i < opts.bounds.size(); ++i) {
        const auto& b = opts.bounds[i];
        if (!(b.lower <= b.upper)) throw std::invalid_argument(fmt::format("minimize_bounded: lower > upper at {}", i));
        if (x0[static_cast<Eigen::Index>(i)] < b.lower || x0[static_cast<Eigen::Index>(i)] > b.upper) {
            throw std::invalid_argument(fmt::format("minimize_bounded: x0[{}] outside bounds", i));
        }
    }

    MinimizeResult res;
    res.x = x0;
    res.value = f(res.x);
    if (!std::isfinite(res.value)) throw NonFiniteError("minimize_bounded: non-finite objective at x0", -1);

    Vector g = bounded_gradient(f, res.x, opts.bounds, opts.fd_step);
    Matrix hinv = Matrix::Identity(n, n);
    bool hinv_is_identity = true;

    auto active = [&](Eigen::Index i, const Vector& x, const Vector& grad) {
        if (opts.bounds.empty()) return false;
        const auto& b = opts.bounds[static_cast<std::size_t>(i)];
        return (x[i] <= b.lower && grad[i] > 0.0) || (x[i] >= b.upper && grad[i] < 0.0);
    };

    for (int iter = 0;; ++iter) {
        res.iterations = iter;
        res.projected_gradient_norm = max_norm(res.x - project(res.x - g, opts.bounds));
        if (res.projected_gradient_norm <= opts.tol_gradient) {
            res.converged = true;
            return res;
        }
        if (iter >= opts.max_iterations) return res;

        Vector d = -hinv * g;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (active(i, res.x, g)) d[i] = 0.0;
        }
        if (g.dot(d) >= 0.0) {
            hinv.setIdentity();
            hinv_is_identity = true;
            d = -g;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (active(i, res.x, g)) d[i] = 0.0;
            }
        }

        Vector x_new;
        double f_new = 0.0;
        bool accepted = false;
        double step = 1.0;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            x_new = project(res.x + step * d, opts.bounds);
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * g.dot(x_new - res.x)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (hinv_is_identity) return res;  // stalled at numerical precision
            hinv.setIdentity();
            hinv_is_identity = true;
            continue;
        }

        Vector g_new = bounded_gradient(f, x_new, opts.bounds, opts.fd_step);
        const Vector s = x_new - res.x;
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Matrix eye = Matrix::Identity(n, n);
            hinv = (eye - rho * s * y.transpose()) * hinv * (eye - rho * y * s.transpose()) +
                   rho * s * s.transpose();
            hinv_is_identity = false;
        }
        res.x = std::move(x_new);
        res.value = f_new;
        g = std::move(g_new);
    }
}

double bisect(const std::function<double(double)>& g, double lo, double hi, double tol, int max_iterations) {
    double g_lo = g(lo);
    const double g_hi = g(hi);
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    if ((g_lo > 0.0) == (g_hi > 0.0)) throw std::invalid_argument("bisect: no sign change on the bracket");
    for (int i = 0; i < max_iterations && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = g(mid);
        if (g_mid == 0.0) return mid;
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace olg::numerics
