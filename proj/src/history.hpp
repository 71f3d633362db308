// history.hpp — Packed storage for the discrete convolution sums sum_{j=1}^{m-1} K_{m-j} X_j

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace memkernel::detail {

// X_0, X_1, ... stacked vertically: X_j occupies rows [j r, (j+1) r).
class StackedSeries {
public:
    StackedSeries(Eigen::Index rows, std::size_t capacity)
        : rows_(rows), data_(Eigen::MatrixXcd::Zero(rows * static_cast<Eigen::Index>(capacity), rows))
    {
    }

    void set(std::size_t k, const Eigen::MatrixXcd& m) { data_.middleRows(offset(k), rows_) = m; }
    Eigen::Index rows() const { return rows_; }
    std::size_t capacity() const { return static_cast<std::size_t>(data_.rows() / rows_); }
    const Eigen::MatrixXcd& data() const { return data_; }
    Eigen::Index offset(std::size_t k) const { return static_cast<Eigen::Index>(k) * rows_; }

private:
    Eigen::Index rows_;
    Eigen::MatrixXcd data_;
};

// K_0 ... K_{n-1} side by side in reverse order, so that the terms K_{m-1}, ..., K_1
// form one contiguous block row.
class ReversedKernel {
public:
    explicit ReversedKernel(const std::vector<const Eigen::MatrixXcd*>& values)
        : rows_(values.front()->rows()), count_(values.size()),
          data_(rows_, rows_ * static_cast<Eigen::Index>(values.size()))
    {
        for (std::size_t k = 0; k < count_; ++k) data_.middleCols(column(k), rows_) = *values[k];
    }

    // sum_{j=1}^{m-1} K_{m-j} X_j
    Eigen::MatrixXcd interior_sum(std::size_t m, const StackedSeries& x) const
    {
        if (m < 2) return Eigen::MatrixXcd::Zero(rows_, rows_);
        const Eigen::Index width = static_cast<Eigen::Index>(m - 1) * rows_;
        Eigen::MatrixXcd out(rows_, rows_);
        out.noalias() = data_.middleCols(column(m - 1), width) * x.data().middleRows(x.offset(1), width);
        return out;
    }

private:
    Eigen::Index column(std::size_t k) const { return static_cast<Eigen::Index>(count_ - 1 - k) * rows_; }

    Eigen::Index rows_;
    std::size_t count_;
    Eigen::MatrixXcd data_;
};

// sum_{j=1}^{m-1} w_{m-j} X_j for scalar weights.
inline Eigen::MatrixXcd weighted_interior_sum(const Eigen::VectorXd& weights, std::size_t m, const StackedSeries& x)
{
    const Eigen::Index rows = x.rows();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows, rows);
    if (m < 2) return out;
    const Eigen::Index terms = static_cast<Eigen::Index>(m - 1);
    const Eigen::VectorXcd w = weights.segment(1, terms).reverse().cast<std::complex<double>>();
    const Eigen::Index height = x.data().rows();
    for (Eigen::Index c = 0; c < rows; ++c) {
        // Column c of every X_j, one X_j per column of the map.
        const Eigen::Map<const Eigen::MatrixXcd, 0, Eigen::OuterStride<>> column(
            x.data().data() + c * height + rows, rows, terms, Eigen::OuterStride<>(rows));
        out.col(c).noalias() = column * w;
    }
    return out;
}

} // namespace memkernel::detail
