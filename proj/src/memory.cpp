#include "memkernel/memory.hpp"

#include <algorithm>
#include <cmath>

namespace memkernel {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// gamma^m t^(m-1) exp(-gamma t) / (m-1)!
double erlang_density(const Erlang& e, double t)
{
    if (t == 0.0) return e.order == 1 ? e.scale * e.gamma : 0.0;
    const double log_val = e.order * std::log(e.gamma) + (e.order - 1) * std::log(t) -
                           e.gamma * t - std::lgamma(static_cast<double>(e.order));
    return e.scale * std::exp(log_val);
}

double erlang_derivative(const Erlang& e, double t)
{
    const int m = e.order;
    const double pref = e.scale * std::pow(e.gamma, m) * std::exp(-e.gamma * t) /
                        std::tgamma(static_cast<double>(m));
    const double rising = m == 1 ? 0.0 : (m - 1) * std::pow(t, m - 2);
    return pref * (rising - e.gamma * std::pow(t, m - 1));
}

double erlang_integral(const Erlang& e, double t)
{
    // 1 - exp(-gt) sum_{k<m} (gt)^k / k!
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < e.order; ++k) {
        term *= e.gamma * t / k;
        sum += term;
    }
    return e.scale * (1.0 - std::exp(-e.gamma * t) * sum);
}

const Samples& samples_on(const Samples& s, const TimeGrid& grid)
{
    require(grid.same_step(TimeGrid(s.step, 1)),
            "memory function samples have step " + std::to_string(s.step) +
                " but the grid step is " + std::to_string(grid.step));
    require(grid.count <= s.values.size(),
            "grid needs " + std::to_string(grid.count) + " points but only " +
                std::to_string(s.values.size()) + " samples are available");
    return s;
}

// Smooth samples have |second difference| ~ h |f'| * (h |f''/f'|); a jump or
// kink drives the ratio to >= 1.
bool looks_differentiable(const Eigen::VectorXd& v)
{
    if (v.size() < 3) return false;
    const Eigen::Index n = v.size();
    const Eigen::VectorXd first = v.tail(n - 1) - v.head(n - 1);
    const Eigen::VectorXd second = first.tail(n - 2) - first.head(n - 2);
    const double scale = first.cwiseAbs().maxCoeff();
    return second.cwiseAbs().maxCoeff() <= 0.75 * scale;
}

} // namespace

MemoryFunction::MemoryFunction(Kind kind) : kind_(std::move(kind))
{
    std::visit(overloaded{
                   [](const Erlang& e) {
                       require(std::isfinite(e.gamma) && e.gamma > 0.0, "erlang gamma must be positive");
                       require(e.order >= 1, "erlang order must be >= 1");
                       require(std::isfinite(e.scale), "erlang scale must be finite");
                   },
                   [](const Samples& s) {
                       require(std::isfinite(s.step) && s.step > 0.0, "sample step must be positive");
                       require(!s.values.empty(), "samples must be non-empty");
                       for (double v : s.values) require(std::isfinite(v), "samples must be finite");
                   },
                   [](const ZeroMemory&) {},
               },
               kind_);
}

MemoryFunction MemoryFunction::erlang(double gamma, int order, double scale)
{
    return MemoryFunction(Erlang{gamma, order, scale});
}

MemoryFunction MemoryFunction::samples(double step, std::vector<double> values)
{
    return MemoryFunction(Samples{step, std::move(values)});
}

Eigen::VectorXd MemoryFunction::sample(const TimeGrid& grid) const
{
    const auto n = static_cast<Eigen::Index>(grid.count);
    return std::visit(overloaded{
                          [&](const Erlang& e) {
                              Eigen::VectorXd out(n);
                              for (Eigen::Index k = 0; k < n; ++k)
                                  out[k] = erlang_density(e, grid.time(k));
                              return out;
                          },
                          [&](const Samples& s) {
                              samples_on(s, grid);
                              return Eigen::VectorXd(
                                  Eigen::Map<const Eigen::VectorXd>(s.values.data(), n));
                          },
                          [&](const ZeroMemory&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(n)); },
                      },
                      kind_);
}

Eigen::VectorXd MemoryFunction::derivative(const TimeGrid& grid) const
{
    const auto n = static_cast<Eigen::Index>(grid.count);
    return std::visit(overloaded{
                          [&](const Erlang& e) {
                              Eigen::VectorXd out(n);
                              for (Eigen::Index k = 0; k < n; ++k)
                                  out[k] = erlang_derivative(e, grid.time(k));
                              return out;
                          },
                          [&](const Samples&) { return finite_difference(sample(grid), grid.step); },
                          [&](const ZeroMemory&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(n)); },
                      },
                      kind_);
}

double MemoryFunction::initial_value() const
{
    return std::visit(overloaded{
                          [](const Erlang& e) { return erlang_density(e, 0.0); },
                          [](const Samples& s) { return s.values.front(); },
                          [](const ZeroMemory&) { return 0.0; },
                      },
                      kind_);
}

double MemoryFunction::integral(double t) const
{
    return std::visit(overloaded{
                          [&](const Erlang& e) { return erlang_integral(e, t); },
                          [](const Samples&) -> double {
                              throw InvalidInput("integral: no closed form for sampled memory functions");
                          },
                          [](const ZeroMemory&) { return 0.0; },
                      },
                      kind_);
}

double MemoryFunction::total_integral() const
{
    return std::visit(overloaded{
                          [](const Erlang& e) { return e.scale; },
                          [](const Samples&) -> double {
                              throw InvalidInput("total_integral: no closed form for sampled memory functions");
                          },
                          [](const ZeroMemory&) { return 0.0; },
                      },
                      kind_);
}

AdmissibilityReport check_admissible(const MemoryFunction& f, double horizon, double tol, double step)
{
    require(std::isfinite(horizon) && horizon > 0.0, "check_admissible: horizon must be positive");
    AdmissibilityReport report;
    report.tolerance = tol;

    Eigen::VectorXd values;
    if (const auto* s = std::get_if<Samples>(&f.kind())) {
        const auto available = static_cast<double>(s->values.size() - 1) * s->step;
        const TimeGrid grid = TimeGrid::covering(s->step, std::min(horizon, available));
        values = f.sample(grid);
        report.integral_to_horizon = cumulative_trapezoid(values, grid.step)[values.size() - 1];
        report.integral_total = report.integral_to_horizon;
    } else {
        values = f.sample(TimeGrid::covering(std::min(step, horizon), horizon));
        report.integral_to_horizon = f.integral(horizon);
        report.integral_total = f.total_integral();
    }
    report.min_value = values.minCoeff();
    report.nonnegative = report.min_value >= -tol;
    report.normalized = report.integral_total <= 1.0 + tol;
    return report;
}

ScalarSeries g_from_f(const MemoryFunction& f, const TimeGrid& grid)
{
    ScalarSeries g{grid, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid.count))};
    g.values -= cumulative_trapezoid(f.sample(grid), grid.step);
    return g;
}

KappaResult kappa_from_f(const MemoryFunction& f, const TimeGrid& grid)
{
    KappaResult result;
    const Eigen::VectorXd fv = f.sample(grid);
    if (!f.closed_form()) {
        require(looks_differentiable(fv),
                "kappa_from_f: sampled memory function is not differentiable on the grid");
    }
    const double f0 = f.initial_value();
    if (!f.closed_form() && f0 != 0.0) {
        result.warnings.push_back("f(0) = " + std::to_string(f0) +
                                  " != 0: kappa carries a Dirac part of that weight (local_weight)");
    }
    const Eigen::VectorXd forcing = f.derivative(grid) + f0 * fv;

    result.kernel.local_weight = f0;
    result.kernel.regular = ScalarSeries{grid, volterra2_scalar(fv, forcing, grid.step)};
    result.first_kind_residual = first_kind_residual(f, result.kernel);
    return result;
}

double first_kind_residual(const MemoryFunction& f, const ScalarKernel& kappa)
{
    const TimeGrid& grid = kappa.regular.grid;
    const Eigen::VectorXd fv = f.sample(grid);
    const Eigen::VectorXd g = g_from_f(f, grid).values;
    const Eigen::VectorXd& k = kappa.regular.values;
    const Eigen::Index n = k.size();
    const double h = grid.step;

    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double conv = 0.0;
        if (i > 0) {
            conv = 0.5 * (g[i] * k[0] + g[0] * k[i]);
            for (Eigen::Index j = 1; j < i; ++j) conv += g[i - j] * k[j];
            conv *= h;
        }
        worst = std::max(worst, std::abs(kappa.local_weight * g[i] + conv - fv[i]));
    }
    return worst;
}

Eigen::VectorXd volterra2_scalar(const Eigen::VectorXd& kernel, const Eigen::VectorXd& forcing,
                                 double step)
{
    require(kernel.size() == forcing.size(), "volterra2_scalar: kernel and forcing lengths differ");
    require(std::isfinite(step) && step > 0.0, "volterra2_scalar: step must be positive");
    const Eigen::Index n = forcing.size();
    Eigen::VectorXd x(n);
    if (n == 0) return x;

    const double diag = 1.0 - 0.5 * step * kernel[0];
    if (std::abs(diag) < 1e-12) {
        throw NumericalError("volterra2_scalar: step " + std::to_string(step) +
                             " makes the trapezoid diagonal singular (k(0) = " +
                             std::to_string(kernel[0]) + ")");
    }
    x[0] = forcing[0];
    for (Eigen::Index i = 1; i < n; ++i) {
        double history = 0.5 * kernel[i] * x[0];
        for (Eigen::Index j = 1; j < i; ++j) history += kernel[i - j] * x[j];
        x[i] = (forcing[i] + step * history) / diag;
        if (!std::isfinite(x[i])) {
            throw NumericalError("volterra2_scalar: non-finite value at step " + std::to_string(i));
        }
    }
    return x;
}

Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& values, double step)
{
    Eigen::VectorXd out(values.size());
    if (values.size() == 0) return out;
    out[0] = 0.0;
    for (Eigen::Index k = 1; k < values.size(); ++k)
        out[k] = out[k - 1] + 0.5 * step * (values[k - 1] + values[k]);
    return out;
}

Eigen::VectorXd finite_difference(const Eigen::VectorXd& values, double step)
{
    const Eigen::Index n = values.size();
    require(n >= 3, "finite_difference: need at least 3 samples");
    Eigen::VectorXd out(n);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * step);
    for (Eigen::Index k = 1; k + 1 < n; ++k) out[k] = (values[k + 1] - values[k - 1]) / (2.0 * step);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * step);
    return out;
}

} // namespace memkernel
