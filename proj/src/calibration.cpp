#include "olg/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "olg/numerics.hpp"

namespace olg {
namespace {

struct Differences {
    std::vector<double> x;  // dlnK - dlnL
    std::vector<double> y;  // dlnY - dlnL
};

Differences differences(const CalibrationSeries& s) {
    Differences d;
    for (std::size_t t = 1; t < s.size(); ++t) {
        const double dl = std::log(s.L[t]) - std::log(s.L[t - 1]);
        d.x.push_back(std::log(s.K[t]) - std::log(s.K[t - 1]) - dl);
        d.y.push_back(std::log(s.Y[t]) - std::log(s.Y[t - 1]) - dl);
    }
    return d;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_field(std::string_view field, int line_no, std::string_view column) {
    T value{};
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw CalibrationError(fmt::format("line {}: cannot parse {} value '{}'", line_no, column, field));
    }
    return value;
}

}  // namespace

void validate(const CalibrationSeries& s, std::size_t min_length) {
    if (s.Y.size() != s.years.size() || s.K.size() != s.years.size() || s.L.size() != s.years.size()) {
        throw CalibrationError("series: year, Y, K and L have different lengths");
    }
    if (s.size() < min_length) {
        throw CalibrationError(fmt::format("series: {} observations, at least {} required", s.size(), min_length));
    }
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (!(s.Y[t] > 0.0) || !(s.K[t] > 0.0) || !(s.L[t] > 0.0)) {
            throw CalibrationError(fmt::format("series: non-positive value in year {}", s.years[t]));
        }
        if (t > 0 && s.years[t] <= s.years[t - 1]) {
            throw CalibrationError(fmt::format("series: years not strictly increasing at {}", s.years[t]));
        }
    }
}

double estimate_alpha(const CalibrationSeries& series) {
    validate(series);
    const auto d = differences(series);
    const double sxx = std::inner_product(d.x.begin(), d.x.end(), d.x.begin(), 0.0);
    const double sxy = std::inner_product(d.x.begin(), d.x.end(), d.y.begin(), 0.0);
    const double scale = std::max(1.0, std::abs(sxy));
    if (!(sxx > 1e-28 * scale)) {
        throw CalibrationError("estimate_alpha: capital and labor grow at identical rates, regressor has no variance");
    }
    return sxy / sxx;
}

double estimate_A(const CalibrationSeries& series, double alpha) {
    validate(series, 1);
    if (!(alpha > 0.0 && alpha < 1.0)) throw CalibrationError(fmt::format("estimate_A: alpha = {} outside (0, 1)", alpha));
    double sum = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        sum += std::exp(std::log(series.Y[t]) - alpha * std::log(series.K[t]) - (1.0 - alpha) * std::log(series.L[t]));
    }
    return sum / static_cast<double>(series.size());
}

InterceptRegression intercept_diagnostic(const CalibrationSeries& series) {
    validate(series);
    const auto d = differences(series);
    const auto n = static_cast<double>(d.x.size());
    const double mx = std::accumulate(d.x.begin(), d.x.end(), 0.0) / n;
    const double my = std::accumulate(d.y.begin(), d.y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        sxx += (d.x[i] - mx) * (d.x[i] - mx);
        sxy += (d.x[i] - mx) * (d.y[i] - my);
    }
    if (!(sxx > 1e-28 * std::max(1.0, std::abs(sxy)))) {
        throw CalibrationError("intercept_diagnostic: regressor has no variance");
    }
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

PredictedSeries predicted_series(const CalibrationSeries& series, double alpha, double A, double delta) {
    validate(series, 1);
    PredictedSeries out;
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double K = series.K[t];
        const double L = series.L[t];
        out.Y_fitted.push_back(A * std::pow(K, alpha) * std::pow(L, 1.0 - alpha));
        out.r_implied.push_back(alpha * A * std::pow(L / K, 1.0 - alpha) - delta);
    }
    return out;
}

CalibrationSeries parse_series(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<std::tuple<int, double, double, double, int>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = split(view);
        if (!header_seen) {
            if (fields != std::vector<std::string_view>{"year", "Y", "K", "L"}) {
                throw CalibrationError(fmt::format("line {}: expected header 'year,Y,K,L', got '{}'", line_no, view));
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw CalibrationError(fmt::format("line {}: expected 4 fields, got {}", line_no, fields.size()));
        }
        const int year = parse_field<int>(fields[0], line_no, "year");
        const double Y = parse_field<double>(fields[1], line_no, "Y");
        const double K = parse_field<double>(fields[2], line_no, "K");
        const double L = parse_field<double>(fields[3], line_no, "L");
        for (auto [name, v] : {std::pair{"Y", Y}, std::pair{"K", K}, std::pair{"L", L}}) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw CalibrationError(fmt::format("line {} (year {}): {} = {} is not positive", line_no, year, name, v));
            }
        }
        rows.emplace_back(year, Y, K, L, line_no);
    }
    if (!header_seen) throw CalibrationError("series file has no header");
    std::sort(rows.begin(), rows.end());
    CalibrationSeries out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [year, Y, K, L, src_line] = rows[i];
        if (i > 0 && year == out.years.back()) {
            throw CalibrationError(fmt::format("line {}: duplicate year {}", src_line, year));
        }
        out.years.push_back(year);
        out.Y.push_back(Y);
        out.K.push_back(K);
        out.L.push_back(L);
    }
    validate(out, 1);
    return out;
}

CalibrationSeries ingest_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibrationError(fmt::format("cannot open series file '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_series(buffer.str());
}

double elliptical_mu(double n, double b, double nu, double l_tilde) {
    const double x = n / l_tilde;
    return (b / l_tilde) * std::pow(x, nu - 1.0) * std::pow(1.0 - std::pow(x, nu), (1.0 - nu) / nu);
}

double cfe_mu(double n, double theta) { return std::pow(n, 1.0 / theta); }

std::vector<double> labor_grid(double l_tilde, int points, double lo, double hi) {
    if (points < 1) throw CalibrationError("labor grid needs at least one point");
    if (!(lo > 0.0 && hi < 1.0 && lo <= hi)) throw CalibrationError("labor grid must lie inside (0, l_tilde)");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double share = points == 1 ? 0.5 : static_cast<double>(i) / (points - 1);
        grid[static_cast<std::size_t>(i)] = l_tilde * (lo + share * (hi - lo));
    }
    return grid;
}

double ellipse_objective(double b, double nu, double theta, double l_tilde, const std::vector<double>& grid) {
    double sum = 0.0;
    for (double n : grid) {
        const double gap = cfe_mu(n, theta) - elliptical_mu(n, b, nu, l_tilde);
        sum += gap * gap;
    }
    return sum;
}

double sup_mu_gap(double b, double nu, double theta, double l_tilde, const std::vector<double>& grid) {
    double worst = 0.0;
    for (double n : grid) worst = std::max(worst, std::abs(cfe_mu(n, theta) - elliptical_mu(n, b, nu, l_tilde)));
    return worst;
}

EllipseFit fit_ellipse(double theta, double l_tilde, const std::vector<double>& grid, const EllipseBounds& bounds) {
    if (!(theta > 0.0)) throw CalibrationError(fmt::format("fit_ellipse: theta = {} must be positive", theta));
    if (grid.empty()) throw CalibrationError("fit_ellipse: empty grid");
    for (double n : grid) {
        if (!(n > 0.0 && n < l_tilde)) throw CalibrationError(fmt::format("fit_ellipse: grid point {} outside (0, l_tilde)", n));
    }
    numerics::MinimizeOptions opts;
    opts.bounds = {{bounds.b_lower, bounds.b_upper}, {bounds.nu_lower, bounds.nu_upper}};
    opts.tol_gradient = 1e-7;
    auto objective = [&](const numerics::Vector& v) { return ellipse_objective(v[0], v[1], theta, l_tilde, grid); };
    numerics::Vector x0(2);
    x0 << 0.5, 2.0;
    const auto res = numerics::minimize_bounded(objective, x0, opts);
    if (!std::isfinite(res.value)) throw CalibrationError("fit_ellipse: objective is not finite at the optimum");

    EllipseFit fit;
    fit.b = res.x[0];
    fit.nu = res.x[1];
    fit.objective = res.value;
    fit.grid = grid;
    fit.underdetermined = grid.size() < 2;
    fit.converged = res.converged;
    return fit;
}

}  // namespace olg
