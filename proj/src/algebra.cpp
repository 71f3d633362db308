#include "memkernel/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace memkernel {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_square(const Operator& a, const char* what)
{
    require(a.rows() == a.cols() && a.rows() >= 1,
            std::string(what) + " must be a non-empty square matrix");
}

bool all_finite(const Eigen::MatrixXcd& m)
{
    return m.real().allFinite() && m.imag().allFinite();
}

} // namespace

Eigen::VectorXcd vec(const Operator& a)
{
    return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

Operator unvec(const Eigen::VectorXcd& v, int dim)
{
    require(v.size() == static_cast<Eigen::Index>(dim) * dim, "unvec: length is not dim^2");
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

Operator matrix_unit(int dim, int i, int j)
{
    Operator e = Operator::Zero(dim, dim);
    e(i, j) = 1.0;
    return e;
}

namespace pauli {

Operator x()
{
    Operator m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Operator y()
{
    Operator m(2, 2);
    m << 0, -kI, kI, 0;
    return m;
}

Operator z()
{
    Operator m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Operator plus() { return matrix_unit(2, 1, 0); }
Operator minus() { return matrix_unit(2, 0, 1); }

} // namespace pauli

Operator superop_apply(const SuperOp& map, const Operator& a)
{
    require_square(a, "operator");
    require(map.dim() == a.rows(), "superop_apply: dimension mismatch (superop d=" +
                                       std::to_string(map.dim()) + ", operator d=" +
                                       std::to_string(a.rows()) + ")");
    return unvec(map.matrix() * vec(a), map.dim());
}

SuperOp sandwich(const Operator& left, const Operator& right)
{
    require_square(left, "left factor");
    require_square(right, "right factor");
    require(left.rows() == right.rows(), "sandwich: factor dimensions differ");
    // vec(L a R) = (R^T (x) L) vec(a)
    return SuperOp(Eigen::kroneckerProduct(right.transpose(), left).eval());
}

SuperOp conjugation(const Operator& u) { return sandwich(u, u.adjoint()); }

SuperOp transpose_map(int dim)
{
    require(dim >= 1, "dimension must be positive");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(j + i * dim, i + j * dim) = 1.0;
    return SuperOp(std::move(m));
}

SuperOp trace_map(int dim)
{
    require(dim >= 1, "dimension must be positive");
    const Eigen::VectorXcd one = vec(Operator::Identity(dim, dim));
    return SuperOp((one * one.transpose() / static_cast<double>(dim)).eval());
}

SuperOp dual(const SuperOp& map)
{
    // <a,b> = vec(a)^dagger vec(b), so the dual is the conjugate transpose.
    return SuperOp(map.matrix().adjoint());
}

ChoiMatrix choi(const SuperOp& map)
{
    const int d = map.dim();
    ChoiMatrix c{d, Eigen::MatrixXcd::Zero(d * d, d * d)};
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            // S(E_ij) is column i + j*d of the superop matrix.
            c.matrix.block(i * d, j * d, d, d) = unvec(map.matrix().col(i + j * d), d);
        }
    }
    return c;
}

SuperOp from_choi(const ChoiMatrix& c)
{
    const int d = c.dim;
    require(c.matrix.rows() == d * d && c.matrix.cols() == d * d, "Choi matrix must be d^2 x d^2");
    Eigen::MatrixXcd m(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m.col(i + j * d) = vec(c.matrix.block(i * d, j * d, d, d));
    return SuperOp(std::move(m));
}

CpDefect cp_defect(const SuperOp& map)
{
    const ChoiMatrix c = choi(map);
    if (!all_finite(c.matrix)) throw NumericalError("cp_defect: Choi matrix has non-finite entries");
    const Eigen::MatrixXcd herm = 0.5 * (c.matrix + c.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("cp_defect: eigensolver failed on Choi matrix of dimension " +
                             std::to_string(herm.rows()));
    }
    return {solver.eigenvalues().minCoeff(), (c.matrix - c.matrix.adjoint()).norm()};
}

double unitality_defect(const SuperOp& map)
{
    const Operator one = Operator::Identity(map.dim(), map.dim());
    return (superop_apply(map, one) - one).norm();
}

double generator_defect(const SuperOp& generator)
{
    return superop_apply(generator, Operator::Identity(generator.dim(), generator.dim())).norm();
}

double default_tolerance(int dim) { return 1e-8 * static_cast<double>(dim); }

bool is_hermitian(const Operator& a, double tol)
{
    return a.rows() == a.cols() && (a - a.adjoint()).norm() <= tol;
}

SuperOp gksl_generator(const GkslSpec& spec, Picture picture)
{
    require_square(spec.hamiltonian, "hamiltonian");
    const int d = spec.dim();
    require(is_hermitian(spec.hamiltonian, default_tolerance(d) * std::max(1.0, spec.hamiltonian.norm())),
            "gksl_generator: hamiltonian is not Hermitian");

    const Operator one = Operator::Identity(d, d);
    // i[H, a] = i H a - i a H
    SuperOp gen = sandwich(kI * spec.hamiltonian, one) - sandwich(one, kI * spec.hamiltonian);
    for (std::size_t k = 0; k < spec.jumps.size(); ++k) {
        const auto& jump = spec.jumps[k];
        require_square(jump.op, "jump operator");
        require(jump.op.rows() == d, "jump operator " + std::to_string(k) + " has wrong dimension");
        require(std::isfinite(jump.rate) && jump.rate >= 0.0,
                "jump rate " + std::to_string(k) + " must be non-negative");
        const Operator vdv = jump.op.adjoint() * jump.op;
        gen += jump.rate * (sandwich(jump.op.adjoint(), jump.op) - 0.5 * sandwich(vdv, one) -
                            0.5 * sandwich(one, vdv));
    }
    return picture == Picture::heisenberg ? gen : dual(gen);
}

SuperOp expm(const SuperOp& map, double t)
{
    require(std::isfinite(t), "expm: time must be finite");
    const Eigen::MatrixXcd scaled = t * map.matrix();
    Eigen::MatrixXcd result = scaled.exp();
    if (!all_finite(result)) {
        throw NumericalError("expm: overflow at |t| * ||S|| = " + std::to_string(scaled.norm()));
    }
    return SuperOp(std::move(result));
}

Eigen::MatrixXcd commutator(const SuperOp& a, const SuperOp& b)
{
    require(a.dim() == b.dim(), "commutator: dimension mismatch");
    return a.matrix() * b.matrix() - b.matrix() * a.matrix();
}

} // namespace memkernel
