#pragma once

#include <filesystem>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace olg {

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Annual macro series: constant-price output, constant-price gross fixed
/// capital formation, employment.
struct CalibrationSeries {
    std::vector<int> years;
    std::vector<double> Y;
    std::vector<double> K;
    std::vector<double> L;

    [[nodiscard]] std::size_t size() const noexcept { return years.size(); }
};

/// Requires equal lengths, at least `min_length` rows, strictly positive
/// values and strictly increasing years.
void validate(const CalibrationSeries& series, std::size_t min_length = 3);

/// No-intercept OLS of (dlnY - dlnL) on (dlnK - dlnL).
double estimate_alpha(const CalibrationSeries& series);

/// Mean over periods of exp(lnY - alpha lnK - (1 - alpha) lnL).
double estimate_A(const CalibrationSeries& series, double alpha);

/// Same differenced regression with a constant, reported for diagnosis only.
struct InterceptRegression {
    double intercept;
    double slope;
};
InterceptRegression intercept_diagnostic(const CalibrationSeries& series);

/// Fitted output and the implied net return alpha A (L/K)^(1-alpha) - delta.
struct PredictedSeries {
    std::vector<double> Y_fitted;
    std::vector<double> r_implied;
};
PredictedSeries predicted_series(const CalibrationSeries& series, double alpha, double A, double delta);

/// CSV with header year,Y,K,L; '#' starts a comment line. Rows are returned
/// sorted by year.
CalibrationSeries parse_series(std::string_view text);
CalibrationSeries ingest_series(const std::filesystem::path& path);

/// Marginal disutility of the elliptical form with unit weight.
double elliptical_mu(double n, double b, double nu, double l_tilde);
/// Marginal disutility n^(1/theta) of the constant-Frisch form.
double cfe_mu(double n, double theta);

struct EllipseBounds {
    double b_lower = 1e-10;
    double b_upper = 10.0;
    double nu_lower = 1.0 + 1e-10;
    double nu_upper = 10.0;
};

struct EllipseFit {
    double b = 0.0;
    double nu = 0.0;
    double objective = 0.0;
    std::vector<double> grid;
    bool underdetermined = false;  ///< fewer grid points than parameters
    bool converged = false;
};

/// Uniform grid of `points` labor values on [lo, hi] * l_tilde.
std::vector<double> labor_grid(double l_tilde, int points = 1000, double lo = 0.05, double hi = 0.95);

/// Sum over the grid of squared gaps between the elliptical and CFE marginal disutilities.
double ellipse_objective(double b, double nu, double theta, double l_tilde, const std::vector<double>& grid);

EllipseFit fit_ellipse(double theta, double l_tilde, const std::vector<double>& grid, const EllipseBounds& bounds = {});

/// Largest |elliptical - CFE| marginal disutility over the grid.
double sup_mu_gap(double b, double nu, double theta, double l_tilde, const std::vector<double>& grid);

}  // namespace olg
