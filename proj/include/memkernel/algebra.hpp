// algebra.hpp — Operator/superoperator algebra on M_d
//
// Conventions (fixed for the whole library):
//   * vec() stacks columns: vec(a)[i + j*d] = a(i, j).
//   * Choi matrix C(S) = sum_ij E_ij (x) S(E_ij); block (i, j) of C is S(E_ij).
//   * Norms are Frobenius.
//   * Maps are Heisenberg-picture unless stated; the Schroedinger picture is the
//     Hilbert-Schmidt dual.

#pragma once

#include <vector>

#include "memkernel/types.hpp"

namespace memkernel {

Eigen::VectorXcd vec(const Operator& a);
Operator unvec(const Eigen::VectorXcd& v, int dim);

// Matrix unit E_ij in M_d.
Operator matrix_unit(int dim, int i, int j);

namespace pauli {
Operator x();
Operator y();
Operator z();
Operator plus();   // sigma_+ = |1><0|
Operator minus();  // sigma_- = |0><1|
} // namespace pauli

Operator superop_apply(const SuperOp& map, const Operator& a);

// a -> left * a * right
SuperOp sandwich(const Operator& left, const Operator& right);
// a -> u a u^dagger
SuperOp conjugation(const Operator& u);
// a -> a^T
SuperOp transpose_map(int dim);
// a -> tr(a) * 1 / dim
SuperOp trace_map(int dim);

// Hilbert-Schmidt dual: tr((S* a)^dagger b) = tr(a^dagger S(b)).
SuperOp dual(const SuperOp& map);

struct ChoiMatrix {
    int dim = 0;
    Eigen::MatrixXcd matrix;
};

ChoiMatrix choi(const SuperOp& map);
SuperOp from_choi(const ChoiMatrix& choi);

struct CpDefect {
    double min_eigenvalue = 0.0;     // of (C + C^dagger)/2
    double hermiticity_residual = 0.0;  // ||C - C^dagger||

    bool certified(double tol) const
    {
        return min_eigenvalue >= -tol && hermiticity_residual <= tol;
    }
};

CpDefect cp_defect(const SuperOp& map);

// ||S(1) - 1||
double unitality_defect(const SuperOp& map);
// ||L(1)||, the companion check for generators.
double generator_defect(const SuperOp& generator);

// Default certification tolerance 1e-8 * d.
double default_tolerance(int dim);

bool is_hermitian(const Operator& a, double tol);

// Markovian generator in GKSL form.
struct Jump {
    Operator op;
    double rate = 0.0;
};

struct GkslSpec {
    Operator hamiltonian;
    std::vector<Jump> jumps;

    int dim() const { return static_cast<int>(hamiltonian.rows()); }
};

enum class Picture { heisenberg, schroedinger };

// Heisenberg: L(a) = i[H,a] + sum_k g_k (V_k^dag a V_k - 1/2 {V_k^dag V_k, a}).
// Schroedinger: the dual of the Heisenberg generator.
SuperOp gksl_generator(const GkslSpec& spec, Picture picture = Picture::heisenberg);

// exp(t * S).
SuperOp expm(const SuperOp& map, double t);

// Commutator S1 S2 - S2 S1 as a matrix.
Eigen::MatrixXcd commutator(const SuperOp& a, const SuperOp& b);

} // namespace memkernel
