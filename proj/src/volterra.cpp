#include "memkernel/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "history.hpp"
#include "memkernel/algebra.hpp"

namespace memkernel {

namespace {

using Matrix = Eigen::MatrixXcd;

bool all_finite(const Matrix& m) { return m.real().allFinite() && m.imag().allFinite(); }

// Memory kernel K_m on the march grid, either K_m = w_m * factor or a general
// list of matrices.
class HistoryKernel {
public:
    static HistoryKernel none() { return {}; }

    static HistoryKernel factorized(Eigen::VectorXd weights, Matrix factor)
    {
        HistoryKernel k;
        k.weights_ = std::move(weights);
        k.factor_ = std::move(factor);
        k.kind_ = Kind::factorized;
        return k;
    }

    static HistoryKernel general(std::vector<Matrix> values)
    {
        HistoryKernel k;
        std::vector<const Matrix*> refs;
        for (const auto& v : values) refs.push_back(&v);
        k.stack_.emplace(refs);
        k.values_ = std::move(values);
        k.kind_ = Kind::general;
        return k;
    }

    bool empty() const { return kind_ == Kind::none; }

    Matrix at(std::size_t m) const
    {
        switch (kind_) {
        case Kind::factorized: return weights_[static_cast<Eigen::Index>(m)] * factor_;
        case Kind::general: return values_[m];
        case Kind::none: break;
        }
        return {};
    }

    // h [ K_m A_0 / 2 + sum_{j=1}^{m-1} K_{m-j} A_j ]
    Matrix history(std::size_t m, const detail::StackedSeries& A, const Matrix& a0, double h) const
    {
        if (kind_ == Kind::factorized) {
            Matrix acc = detail::weighted_interior_sum(weights_, m, A);
            acc += 0.5 * weights_[static_cast<Eigen::Index>(m)] * a0;
            return h * (factor_ * acc);
        }
        Matrix acc = stack_->interior_sum(m, A);
        acc.noalias() += 0.5 * values_[m] * a0;
        return h * acc;
    }

private:
    enum class Kind { none, factorized, general };
    Kind kind_ = Kind::none;
    Eigen::VectorXd weights_;
    Matrix factor_;
    std::vector<Matrix> values_;
    std::optional<detail::ReversedKernel> stack_;
};

struct March {
    std::vector<Matrix> values;
    std::vector<Matrix> derivatives;
    std::vector<std::string> warnings;
};

March march(const std::optional<Matrix>& local, const HistoryKernel& kernel, int dim,
            const TimeGrid& grid)
{
    const double h = grid.step;
    const Eigen::Index rows = static_cast<Eigen::Index>(dim) * dim;
    const Matrix local_op = local.value_or(Matrix::Zero(rows, rows));
    const Matrix k0 = kernel.empty() ? Matrix::Zero(rows, rows) : kernel.at(0);

    March out;
    const double stiffness = (h * (local_op + h * k0)).norm();
    if (stiffness >= 1.0) {
        out.warnings.push_back("step size warning: ||h (L + h L_0)|| = " + std::to_string(stiffness) +
                               " >= 1; the march may be inaccurate or diverge");
    }

    out.values.reserve(grid.count);
    out.derivatives.reserve(grid.count);
    out.values.push_back(Matrix::Identity(rows, rows));
    out.derivatives.push_back(local_op);
    detail::StackedSeries stacked(rows, kernel.empty() ? 1 : grid.count);
    stacked.set(0, out.values[0]);

    for (std::size_t k = 0; k + 1 < grid.count; ++k) {
        const Matrix& a = out.values[k];
        const Matrix& d = out.derivatives[k];
        const Matrix hist = kernel.empty() ? Matrix::Zero(rows, rows) : kernel.history(k + 1, stacked, out.values[0], h);

        const Matrix predicted = a + h * d;
        const Matrix predicted_rate = local_op * predicted + hist + 0.5 * h * (k0 * predicted);
        Matrix next = a + 0.5 * h * (d + predicted_rate);
        if (!all_finite(next)) {
            throw NumericalError("march: non-finite value at step " + std::to_string(k + 1) +
                                 " (t = " + std::to_string(grid.time(k + 1)) + ")");
        }
        Matrix rate = local_op * next + hist + 0.5 * h * (k0 * next);
        if (!kernel.empty()) stacked.set(k + 1, next);
        out.values.push_back(std::move(next));
        out.derivatives.push_back(std::move(rate));
    }
    return out;
}

HistoryKernel history_kernel(const KernelSpec& spec, const TimeGrid& grid)
{
    const auto memory_grid = spec.memory_grid();
    if (!memory_grid) return HistoryKernel::none();
    require(memory_grid->same_step(grid),
            "evolve: memory kernel step " + std::to_string(memory_grid->step) +
                " differs from the grid step " + std::to_string(grid.step));
    require(memory_grid->count >= grid.count,
            "evolve: memory kernel has " + std::to_string(memory_grid->count) +
                " samples, the grid needs " + std::to_string(grid.count));

    if (const auto* scalar = std::get_if<ScalarCpMemory>(&spec.memory)) {
        const SuperOp factor = scalar->channel - SuperOp::identity(spec.dim);
        return HistoryKernel::factorized(
            scalar->kappa.regular.values.head(static_cast<Eigen::Index>(grid.count)), factor.matrix());
    }
    std::vector<Matrix> values;
    values.reserve(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) values.push_back(spec.memory_at(k).matrix());
    return HistoryKernel::general(std::move(values));
}

std::vector<SuperOp> to_superops(std::vector<Matrix>&& matrices)
{
    std::vector<SuperOp> out;
    out.reserve(matrices.size());
    for (auto& m : matrices) out.emplace_back(std::move(m));
    return out;
}

SuperOpSeries cumulative_trapezoid(const SuperOpSeries& series)
{
    SuperOpSeries out{series.grid, {}};
    out.values.reserve(series.size());
    out.values.push_back(SuperOp::zero(series.dim()));
    for (std::size_t k = 1; k < series.size(); ++k) {
        out.values.push_back(out.values.back() + (0.5 * series.grid.step) * (series[k - 1] + series[k]));
    }
    return out;
}

} // namespace

double EvolutionTrace::min_cp_defect() const
{
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& d : diagnostics) worst = std::min(worst, d.cp_defect);
    return worst;
}

double EvolutionTrace::max_unitality_defect() const
{
    double worst = 0.0;
    for (const auto& d : diagnostics) worst = std::max(worst, d.unitality_defect);
    return worst;
}

double EvolutionTrace::max_herm_residual() const
{
    double worst = 0.0;
    for (const auto& d : diagnostics) worst = std::max(worst, d.choi_herm_residual);
    return worst;
}

void compute_diagnostics(EvolutionTrace& trace)
{
    trace.diagnostics.resize(trace.values.size());
    for (std::size_t k = 0; k < trace.values.size(); ++k) {
        const CpDefect cp = cp_defect(trace.values[k]);
        trace.diagnostics[k] = {cp.min_eigenvalue, unitality_defect(trace.values[k]),
                                cp.hermiticity_residual};
    }
}

EvolutionTrace evolve(const KernelSpec& spec, const TimeGrid& grid)
{
    spec.validate();
    require(grid.count >= 1 && grid.step > 0.0, "evolve: invalid grid");

    std::optional<Matrix> local;
    if (spec.local) local = spec.local->matrix();
    March result = march(local, history_kernel(spec, grid), spec.dim, grid);

    EvolutionTrace trace;
    trace.grid = grid;
    trace.values = to_superops(std::move(result.values));
    trace.warnings = std::move(result.warnings);
    compute_diagnostics(trace);
    return trace;
}

double NormalizationSolution::consistency_residual() const
{
    const SuperOpSeries integral = cumulative_trapezoid(F);
    const SuperOp identity = SuperOp::identity(N.dim());
    double worst = 0.0;
    for (std::size_t k = 0; k < N.size(); ++k)
        worst = std::max(worst, norm(N[k] - (identity - integral[k])));
    return worst;
}

NormalizationSolution solve_normalization(const SuperOpSeries& Z, const TimeGrid& grid,
                                          const std::optional<SuperOp>& Z_local)
{
    require(!Z.values.empty(), "solve_normalization: empty Z");
    require(Z.grid.same_step(grid), "solve_normalization: Z step differs from the grid step");
    require(Z.size() >= grid.count, "solve_normalization: Z has fewer samples than the grid");
    const int dim = Z.dim();
    if (Z_local) require(Z_local->dim() == dim, "solve_normalization: Z_local dimension mismatch");

    std::vector<Matrix> kernel;
    kernel.reserve(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) kernel.push_back(-Z[k].matrix());
    std::optional<Matrix> local;
    if (Z_local) local = -Z_local->matrix();

    March result = march(local, HistoryKernel::general(std::move(kernel)), dim, grid);

    NormalizationSolution sol;
    sol.grid = grid;
    sol.N = {grid, to_superops(std::move(result.values))};
    for (auto& d : result.derivatives) d = -d;
    sol.F = {grid, to_superops(std::move(result.derivatives))};
    return sol;
}

GRepresentation extract_G(const SuperOpSeries& trace)
{
    const std::size_t n = trace.size();
    require(n >= 3, "extract_G: need at least 3 grid points, got " + std::to_string(n));
    const double h = trace.grid.step;

    GRepresentation rep;
    rep.grid = trace.grid;
    rep.A = trace;
    rep.G.grid = trace.grid;
    rep.G.values.reserve(n);
    rep.G.values.push_back((1.0 / (2.0 * h)) * (-3.0 * trace[0] + 4.0 * trace[1] - trace[2]));
    for (std::size_t k = 1; k + 1 < n; ++k)
        rep.G.values.push_back((1.0 / (2.0 * h)) * (trace[k + 1] - trace[k - 1]));
    rep.G.values.push_back((1.0 / (2.0 * h)) * (3.0 * trace[n - 1] - 4.0 * trace[n - 2] + trace[n - 3]));

    const SuperOpSeries integral = cumulative_trapezoid(rep.G);
    const SuperOp identity = SuperOp::identity(trace.dim());
    for (std::size_t k = 0; k < n; ++k) {
        rep.max_identity_defect = std::max(rep.max_identity_defect, generator_defect(rep.G[k]));
        rep.reconstruction_residual =
            std::max(rep.reconstruction_residual, norm(identity + integral[k] - trace[k]));
    }
    return rep;
}

GRepresentation extract_G(const EvolutionTrace& trace) { return extract_G(trace.series()); }

LaplaceSample laplace_sample(const SuperOpSeries& values, double p)
{
    require(std::isfinite(p) && p > 0.0, "laplace_sample: p must be positive");
    require(!values.values.empty(), "laplace_sample: empty series");
    const double h = values.grid.step;
    const std::size_t n = values.size();

    Matrix acc = Matrix::Zero(values[0].matrix().rows(), values[0].matrix().cols());
    double max_norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double weight = h * std::exp(-p * values.grid.time(k));
        if (k == 0 || k + 1 == n) weight *= 0.5;
        if (n == 1) weight = 0.0;
        acc += weight * values[k].matrix();
        max_norm = std::max(max_norm, norm(values[k]));
    }
    const double horizon = values.grid.time(n - 1);
    return {p, SuperOp(std::move(acc)), std::exp(-p * horizon) * max_norm / p};
}

std::vector<KernelLaplace> kernel_from_G(const GRepresentation& rep, const std::vector<double>& ps)
{
    const int dim = rep.G.dim();
    const Matrix identity = Matrix::Identity(dim * dim, dim * dim);
    std::vector<KernelLaplace> out;
    out.reserve(ps.size());
    for (double p : ps) {
        const LaplaceSample g_hat = laplace_sample(rep.G, p);
        const LaplaceSample a_hat = laplace_sample(rep.A, p);

        const Matrix shifted = identity + g_hat.value.matrix();
        Eigen::FullPivLU<Matrix> lu(shifted);
        if (lu.rcond() < 1e-10) {
            throw NumericalError("kernel_from_G: I + G_hat is singular at p = " + std::to_string(p) +
                                 " (rcond " + std::to_string(lu.rcond()) + "), p is near a pole");
        }
        Matrix kernel = p * g_hat.value.matrix() * lu.inverse();
        const double residual = (a_hat.value.matrix() * (p * identity - kernel) - identity).norm();
        out.push_back({p, SuperOp(std::move(kernel)), g_hat.value, a_hat.value, residual,
                       std::max(g_hat.tail_bound, a_hat.tail_bound)});
    }
    return out;
}

LaplaceSample kernel_laplace(const KernelSpec& spec, double p)
{
    require(std::isfinite(p) && p > 0.0, "kernel_laplace: p must be positive");
    LaplaceSample out{p, spec.local.value_or(SuperOp::zero(spec.dim)), 0.0};
    if (spec.has_memory()) {
        const LaplaceSample mem = laplace_sample(memory_series(spec), p);
        out.value += mem.value;
        out.tail_bound = mem.tail_bound;
    }
    return out;
}

} // namespace memkernel
