// kernels.hpp — Memory-kernel generators and complete-positivity sufficiency checks
//
// A KernelSpec describes the right-hand side of
//     dA/dt = L A_t + int_0^t L_{t-s} A_s ds,   A_0 = I,
// with an optional local part L and a memory part L_t. When the memory part is
// split as L_t = B_t - Z_t with B_t completely positive and L_t(1) = 0, the
// evolution is completely positive provided the normalization equation
//     dN/dt = -int_0^t Z_{t-s} N_s ds,   N_0 = I
// has a completely positive solution, and (for the Breuer-Vacchini form)
// int_0^t N_{t-s} B_s ds is completely positive as well.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "memkernel/algebra.hpp"
#include "memkernel/memory.hpp"
#include "memkernel/types.hpp"

namespace memkernel {

struct NoMemory {};

// L_t = kappa_reg(t) (B - I). The Dirac part of kappa lives in KernelSpec::local.
struct ScalarCpMemory {
    ScalarKernel kappa;
    SuperOp channel;  // B
};

// L_t = B_t - Z_t, with optional Dirac parts B_local, Z_local.
struct SplitMemory {
    SuperOpSeries positive;    // B_t
    SuperOpSeries normalizer;  // Z_t
    std::optional<SuperOp> positive_local;
    std::optional<SuperOp> normalizer_local;
};

struct SampledMemory {
    SuperOpSeries values;
};

using MemoryPart = std::variant<NoMemory, ScalarCpMemory, SplitMemory, SampledMemory>;

struct KernelSpec {
    int dim = 0;
    std::optional<SuperOp> local;
    MemoryPart memory = NoMemory{};

    bool has_memory() const { return !std::holds_alternative<NoMemory>(memory); }

    // Grid the memory part is sampled on; nullopt for NoMemory.
    std::optional<TimeGrid> memory_grid() const;

    // L_{t_k}; zero for NoMemory.
    SuperOp memory_at(std::size_t k) const;

    // Throws InvalidInput on dimension inconsistencies.
    void validate() const;
};

// Memory part materialized on its own grid.
SuperOpSeries memory_series(const KernelSpec& spec);

struct IdentityAnnihilation {
    double local = 0.0;   // ||L(1)||
    double memory = 0.0;  // max_t ||L_t(1)||
};

IdentityAnnihilation identity_annihilation(const KernelSpec& spec);

// L_t = kappa(t) (B - I); rejects B that is not CP or not unital within tol.
KernelSpec make_scalar_cp_kernel(const ScalarKernel& kappa, const SuperOp& channel,
                                 std::optional<double> tol = std::nullopt);

// Same construction without the CP/unitality gate (used for negative controls
// and for configs that are certified after the fact).
KernelSpec scalar_cp_kernel_unchecked(const ScalarKernel& kappa, const SuperOp& channel);

struct NormalizerSynthesis {
    SuperOpSeries regular;            // Z_reg
    std::optional<SuperOp> local;     // Dirac part W = F_0, present when ||F_0|| > tol
    double convolution_residual = 0;  // sup_t ||N_t W + (N * Z_reg)_t - F_t||
    std::vector<std::string> warnings;
};

// Solves int_0^t N_{t-s} Z_s ds = F_t with N_t = I - int_0^t F through
//   Z_reg = F' + F W + F * Z_reg,   W = F_0.
NormalizerSynthesis z_from_F(const SuperOpSeries& F, std::optional<double> tol = std::nullopt);

// Convolution residual of Z against F on F's grid.
double normalizer_residual(const SuperOpSeries& F, const SuperOpSeries& Z_regular,
                           const std::optional<SuperOp>& Z_local);

struct NormalizationSolution;

struct Theorem1Report {
    double tolerance = 0.0;
    double min_positive_cp_defect = 0.0;   // over B_t (and B_local)
    double max_positive_herm_residual = 0.0;
    IdentityAnnihilation annihilation;
    double min_normalization_cp_defect = 0.0;  // over N_t
    bool positive_cp = false;
    bool annihilates_identity = false;
    bool normalization_cp = false;
    std::vector<std::string> failures;

    bool pass() const { return positive_cp && annihilates_identity && normalization_cp; }
};

struct SplitView {
    SuperOpSeries positive;
    SuperOpSeries normalizer;
    std::optional<SuperOp> positive_local;
    std::optional<SuperOp> normalizer_local;
};

// B_t / Z_t view of a ScalarCp or Split kernel on the given grid.
SplitView split_view(const KernelSpec& spec, const TimeGrid& grid);

// Sufficient condition: B_t CP, L_t(1) = 0, N_t CP.
Theorem1Report theorem1_check(const KernelSpec& spec, const TimeGrid& grid,
                              std::optional<double> tol = std::nullopt);

struct BreuerVacchiniReport {
    double tolerance = 0.0;
    SuperOpSeries convolution;  // M_t = int_0^t N_{t-s} B_s ds (+ N_t B_local)
    double min_cp_defect = 0.0;
    std::size_t worst_index = 0;

    bool pass() const { return min_cp_defect >= -tolerance; }
};

BreuerVacchiniReport breuer_vacchini_check(const NormalizationSolution& normalization,
                                           const SuperOpSeries& positive,
                                           const std::optional<SuperOp>& positive_local = std::nullopt,
                                           std::optional<double> tol = std::nullopt);

// L_t = Z_t (B - I) as a Split kernel with B_t = Z_t B.
KernelSpec generalized_generator(const NormalizerSynthesis& normalizer, const SuperOp& channel,
                                 std::optional<double> tol = std::nullopt);

} // namespace memkernel
