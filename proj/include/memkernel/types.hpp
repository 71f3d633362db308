// types.hpp — Core value types: operators, superoperators, time grids, errors

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace memkernel {

using Complex = std::complex<double>;

// Element of M_d. Hermiticity and positivity are checked, not enforced.
using Operator = Eigen::MatrixXcd;

// Rejected input (dimension mismatch, schema violation, failed precondition).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (NaN/Inf, singular solve, eigensolver failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Linear map on M_d stored as a d^2 x d^2 matrix acting on column-stacked
// vectorizations: vec(S(a)) = matrix * vec(a).
class SuperOp {
public:
    SuperOp() = default;
    explicit SuperOp(Eigen::MatrixXcd matrix);

    static SuperOp identity(int dim);
    static SuperOp zero(int dim);

    int dim() const { return dim_; }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }

    SuperOp& operator+=(const SuperOp& other);
    SuperOp& operator-=(const SuperOp& other);
    SuperOp& operator*=(Complex scale);

private:
    int dim_ = 0;
    Eigen::MatrixXcd matrix_;
};

SuperOp operator+(SuperOp lhs, const SuperOp& rhs);
SuperOp operator-(SuperOp lhs, const SuperOp& rhs);
SuperOp operator-(SuperOp op);
SuperOp operator*(Complex scale, SuperOp op);
SuperOp operator*(double scale, SuperOp op);
// Composition: (lhs * rhs)(a) = lhs(rhs(a)).
SuperOp operator*(const SuperOp& lhs, const SuperOp& rhs);

double norm(const SuperOp& op);

// Uniform grid t_k = k*step, k = 0..count-1.
struct TimeGrid {
    double step = 0.0;
    std::size_t count = 0;

    TimeGrid() = default;
    TimeGrid(double step, std::size_t count);

    // Grid covering [0, horizon] with the given step (count rounded to nearest).
    static TimeGrid covering(double step, double horizon);

    double time(std::size_t k) const { return step * static_cast<double>(k); }
    double horizon() const { return count == 0 ? 0.0 : time(count - 1); }
    bool same_step(const TimeGrid& other) const;
};

// A SuperOp-valued function sampled on a uniform grid.
struct SuperOpSeries {
    TimeGrid grid;
    std::vector<SuperOp> values;

    std::size_t size() const { return values.size(); }
    const SuperOp& operator[](std::size_t k) const { return values[k]; }
    int dim() const { return values.empty() ? 0 : values.front().dim(); }
};

// Scalar function sampled on a uniform grid.
struct ScalarSeries {
    TimeGrid grid;
    Eigen::VectorXd values;
};

void require(bool condition, const std::string& message);

} // namespace memkernel
