// volterra.hpp — Operator-valued Volterra integro-differential solver
//
// Marching scheme: explicit two-stage Heun on a uniform grid, with the memory
// integral evaluated by the composite trapezoid over the stored history. The
// local part L contributes exactly L A_t to the derivative. Cost is O(n^2)
// superoperator products.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memkernel/kernels.hpp"
#include "memkernel/types.hpp"

namespace memkernel {

struct StepDiagnostics {
    double cp_defect = 0.0;
    double unitality_defect = 0.0;
    double choi_herm_residual = 0.0;
};

struct EvolutionTrace {
    TimeGrid grid;
    std::vector<SuperOp> values;  // A_{t_k}
    std::vector<StepDiagnostics> diagnostics;
    std::vector<std::string> warnings;

    double min_cp_defect() const;
    double max_unitality_defect() const;
    double max_herm_residual() const;
    SuperOpSeries series() const { return {grid, values}; }
};

// Fills trace.diagnostics from trace.values.
void compute_diagnostics(EvolutionTrace& trace);

EvolutionTrace evolve(const KernelSpec& spec, const TimeGrid& grid);

struct NormalizationSolution {
    TimeGrid grid;
    SuperOpSeries N;
    SuperOpSeries F;  // -dN/dt from the scheme's derivative values

    // sup_t ||N_t - (I - int_0^t F)||
    double consistency_residual() const;
};

// dN/dt = -Z_local N - int_0^t Z_{t-s} N_s ds, N_0 = I.
NormalizationSolution solve_normalization(const SuperOpSeries& Z, const TimeGrid& grid,
                                          const std::optional<SuperOp>& Z_local = std::nullopt);

struct GRepresentation {
    TimeGrid grid;
    SuperOpSeries G;
    SuperOpSeries A;  // source trace, kept for reconstruction and resolvent checks
    double max_identity_defect = 0.0;  // max_t ||G_t(1)||
    double reconstruction_residual = 0.0;  // sup_t ||I + int_0^t G - A_t||
};

// G_t = dA/dt by second-order finite differences.
GRepresentation extract_G(const SuperOpSeries& trace);
GRepresentation extract_G(const EvolutionTrace& trace);

struct LaplaceSample {
    double p = 0.0;
    SuperOp value;
    double tail_bound = 0.0;  // e^{-pT} max_t ||values|| / p
};

// Trapezoid quadrature of int_0^T e^{-pt} values(t) dt.
LaplaceSample laplace_sample(const SuperOpSeries& values, double p);

struct KernelLaplace {
    double p = 0.0;
    SuperOp kernel;      // L_hat_p = p G_hat (I + G_hat)^{-1}
    SuperOp g_hat;
    SuperOp a_hat;       // Laplace sample of the A trace
    double resolvent_residual = 0.0;  // ||A_hat (pI - L_hat) - I||
    double tail_bound = 0.0;          // max of the G and A tail bounds
};

std::vector<KernelLaplace> kernel_from_G(const GRepresentation& rep, const std::vector<double>& ps);

// Laplace transform of a kernel: L + L_t_hat(p), with the memory part sampled
// on its own grid.
LaplaceSample kernel_laplace(const KernelSpec& spec, double p);

} // namespace memkernel
