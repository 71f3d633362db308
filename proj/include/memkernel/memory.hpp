// memory.hpp — Scalar memory functions f, g, kappa and the scalar Volterra solver

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "memkernel/types.hpp"

namespace memkernel {

// f(t) = scale * gamma^m t^(m-1) exp(-gamma t) / (m-1)!; integrates to `scale`.
struct Erlang {
    double gamma = 1.0;
    int order = 1;
    double scale = 1.0;
};

// Uniform samples f(k*h), k = 0..n-1.
struct Samples {
    double step = 0.0;
    std::vector<double> values;
};

struct ZeroMemory {};

class MemoryFunction {
public:
    using Kind = std::variant<Erlang, Samples, ZeroMemory>;

    MemoryFunction() : kind_(ZeroMemory{}) {}
    MemoryFunction(Kind kind);

    static MemoryFunction erlang(double gamma, int order, double scale = 1.0);
    static MemoryFunction samples(double step, std::vector<double> values);
    static MemoryFunction zero() { return {}; }

    const Kind& kind() const { return kind_; }
    bool closed_form() const { return !std::holds_alternative<Samples>(kind_); }

    // Samples on the grid. For kind Samples the grid step must match and the
    // grid must not extend past the last sample.
    Eigen::VectorXd sample(const TimeGrid& grid) const;

    // Derivative on the grid: analytic for closed forms, second-order finite
    // differences for samples.
    Eigen::VectorXd derivative(const TimeGrid& grid) const;

    // Value at t = 0.
    double initial_value() const;

    // Closed-form integral over [0, t]; only valid when closed_form().
    double integral(double t) const;
    // Closed-form integral over [0, inf); only valid when closed_form().
    double total_integral() const;

private:
    Kind kind_;
};

struct AdmissibilityReport {
    double min_value = 0.0;
    double integral_to_horizon = 0.0;
    // Horizon integral plus analytic tail for closed forms; equal to the
    // horizon integral for samples.
    double integral_total = 0.0;
    double tolerance = 0.0;
    bool nonnegative = true;
    bool normalized = true;

    bool pass() const { return nonnegative && normalized; }
};

// f >= 0 and int_0^inf f <= 1 (+ tol).
AdmissibilityReport check_admissible(const MemoryFunction& f, double horizon, double tol = 1e-8,
                                     double step = 1e-3);

// g(t) = 1 - int_0^t f by composite trapezoid; g(0) = 1 exactly.
ScalarSeries g_from_f(const MemoryFunction& f, const TimeGrid& grid);

// kappa = local_weight * delta + regular. local_weight is the Laplace-domain
// constant: kappa_hat(p) = local_weight + regular_hat(p).
struct ScalarKernel {
    double local_weight = 0.0;
    ScalarSeries regular;
};

struct KappaResult {
    ScalarKernel kernel;
    // sup_t |local_weight g(t) + (g * kappa_reg)(t) - f(t)| on the grid.
    double first_kind_residual = 0.0;
    std::vector<std::string> warnings;
};

// Solves int_0^t g(t-s) kappa(s) ds = f(t) through the differentiated form
//   kappa_reg = f' + f(0) f + f * kappa_reg,   local_weight = f(0).
KappaResult kappa_from_f(const MemoryFunction& f, const TimeGrid& grid);

// First-kind residual of kappa against f on the kernel's grid.
double first_kind_residual(const MemoryFunction& f, const ScalarKernel& kappa);

// x(t) = forcing(t) + int_0^t kernel(t-s) x(s) ds, trapezoidal marching.
Eigen::VectorXd volterra2_scalar(const Eigen::VectorXd& kernel, const Eigen::VectorXd& forcing,
                                 double step);

// Composite trapezoid cumulative integral, out[0] = 0.
Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& values, double step);

// Second-order finite differences: centered inside, one-sided at the ends.
Eigen::VectorXd finite_difference(const Eigen::VectorXd& values, double step);

} // namespace memkernel
