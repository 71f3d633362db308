#include "memkernel/types.hpp"

#include <algorithm>
#include <cmath>

namespace memkernel {

namespace {

int dim_from_superop_rows(Eigen::Index rows)
{
    const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows))));
    if (static_cast<Eigen::Index>(d) * d != rows) {
        throw InvalidInput("SuperOp matrix size " + std::to_string(rows) +
                           " is not a perfect square");
    }
    return d;
}

} // namespace

void require(bool condition, const std::string& message)
{
    if (!condition) throw InvalidInput(message);
}

SuperOp::SuperOp(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix))
{
    require(matrix_.rows() == matrix_.cols(), "SuperOp matrix must be square");
    require(matrix_.rows() >= 1, "SuperOp matrix must be non-empty");
    dim_ = dim_from_superop_rows(matrix_.rows());
}

SuperOp SuperOp::identity(int dim)
{
    require(dim >= 1, "dimension must be positive");
    return SuperOp(Eigen::MatrixXcd::Identity(dim * dim, dim * dim));
}

SuperOp SuperOp::zero(int dim)
{
    require(dim >= 1, "dimension must be positive");
    return SuperOp(Eigen::MatrixXcd::Zero(dim * dim, dim * dim));
}

SuperOp& SuperOp::operator+=(const SuperOp& other)
{
    require(dim_ == other.dim_, "SuperOp dimension mismatch in addition");
    matrix_ += other.matrix_;
    return *this;
}

SuperOp& SuperOp::operator-=(const SuperOp& other)
{
    require(dim_ == other.dim_, "SuperOp dimension mismatch in subtraction");
    matrix_ -= other.matrix_;
    return *this;
}

SuperOp& SuperOp::operator*=(Complex scale)
{
    matrix_ *= scale;
    return *this;
}

SuperOp operator+(SuperOp lhs, const SuperOp& rhs) { return lhs += rhs; }
SuperOp operator-(SuperOp lhs, const SuperOp& rhs) { return lhs -= rhs; }
SuperOp operator-(SuperOp op) { return op *= Complex(-1.0); }
SuperOp operator*(Complex scale, SuperOp op) { return op *= scale; }
SuperOp operator*(double scale, SuperOp op) { return op *= Complex(scale); }

SuperOp operator*(const SuperOp& lhs, const SuperOp& rhs)
{
    require(lhs.dim() == rhs.dim(), "SuperOp dimension mismatch in composition");
    return SuperOp(lhs.matrix() * rhs.matrix());
}

double norm(const SuperOp& op) { return op.matrix().norm(); }

TimeGrid::TimeGrid(double step, std::size_t count) : step(step), count(count)
{
    require(std::isfinite(step) && step > 0.0, "grid step must be positive and finite");
    require(count >= 1, "grid must contain at least one point");
}

TimeGrid TimeGrid::covering(double step, double horizon)
{
    require(std::isfinite(step) && step > 0.0, "grid step must be positive and finite");
    require(std::isfinite(horizon) && horizon >= 0.0, "grid horizon must be non-negative");
    const auto intervals = static_cast<std::size_t>(std::llround(horizon / step));
    return TimeGrid(step, intervals + 1);
}

bool TimeGrid::same_step(const TimeGrid& other) const
{
    return std::abs(step - other.step) <= 1e-12 * std::max(step, other.step);
}

} // namespace memkernel
