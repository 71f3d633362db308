// families.hpp — Semigroup mixtures, their closed-form kernels, and dilations

#pragma once

#include <optional>
#include <vector>

#include "memkernel/algebra.hpp"
#include "memkernel/kernels.hpp"
#include "memkernel/memory.hpp"
#include "memkernel/volterra.hpp"

namespace memkernel {

// A_t = sum_j x_j exp(t L_j), x_j >= 0, sum x_j = 1.
struct MixtureSpec {
    std::vector<double> weights;
    std::vector<SuperOp> generators;

    void validate(std::optional<double> tol = std::nullopt) const;
    int dim() const { return generators.empty() ? 0 : generators.front().dim(); }
};

// A_t = I (1 - sum_j int_0^t x_j) + sum_j int_0^t x_j(s) exp(s L_j) ds.
struct TimeMixtureSpec {
    std::vector<MemoryFunction> weights;
    std::vector<SuperOp> generators;

    int dim() const { return generators.empty() ? 0 : generators.front().dim(); }
};

// Reduced dynamics A_t a = tr_env[(1 (x) omega) exp(t L_tot)(a (x) 1)].
// The composite index is system-major: |a, mu> -> a * env_dim + mu.
struct DilationSpec {
    int system_dim = 0;
    int env_dim = 0;
    GkslSpec total;   // on the composite space, Heisenberg picture
    Operator omega;   // environment density matrix

    void validate(std::optional<double> tol = std::nullopt) const;
};

// Default environment state |0><0|.
Operator ground_state(int env_dim);

EvolutionTrace mixture_evolution(const MixtureSpec& spec, const TimeGrid& grid);

// Commutativity gate ||[a, b]|| <= 1e-10 ||a|| ||b||.
bool commute(const SuperOp& a, const SuperOp& b);

// Local part x1 L1 + x2 L2, memory x1 x2 (L1 - L2)^2 exp(t (x1 L2 + x2 L1)) on the grid.
KernelSpec mixture_kernel_n2(double x1, double x2, const SuperOp& L1, const SuperOp& L2,
                             const TimeGrid& grid);

// Closed-form L_hat_p for n = 2 (the Laplace transform of mixture_kernel_n2).
SuperOp mixture_kernel_n2_hat(double x1, double x2, const SuperOp& L1, const SuperOp& L2, double p);

// L_hat_p = L + B_p C_p^{-1} for three pairwise commuting generators.
SuperOp mixture_kernel_n3_hat(const std::vector<double>& weights, const SuperOp& L1, const SuperOp& L2,
                              const SuperOp& L3, double p);

struct TimeMixtureResult {
    EvolutionTrace trace;
    SuperOpSeries G;  // sum_j x_j(t) (exp(t L_j) - I)
};

TimeMixtureResult time_mixture_evolution(const TimeMixtureSpec& spec, const TimeGrid& grid,
                                         std::optional<double> tol = std::nullopt);

EvolutionTrace dilation_reduced(const DilationSpec& spec, const TimeGrid& grid);

} // namespace memkernel
