#include "memkernel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "history.hpp"
#include "memkernel/volterra.hpp"

namespace memkernel {

namespace {

using Matrix = Eigen::MatrixXcd;

double resolve_tol(std::optional<double> tol, int dim) { return tol.value_or(default_tolerance(dim)); }

void require_series(const SuperOpSeries& s, int dim, const char* what)
{
    require(!s.values.empty(), std::string(what) + " series is empty");
    require(s.grid.count == s.values.size(), std::string(what) + " series length does not match its grid");
    for (const auto& v : s.values)
        require(v.dim() == dim, std::string(what) + " series has inconsistent dimension");
}

void require_channel(const SuperOp& channel, double tol, const char* context)
{
    const CpDefect cp = cp_defect(channel);
    require(cp.certified(tol), std::string(context) + ": channel B is not completely positive (cp_defect " +
                                   std::to_string(cp.min_eigenvalue) + ", Choi hermiticity residual " +
                                   std::to_string(cp.hermiticity_residual) + ")");
    const double unital = unitality_defect(channel);
    require(unital <= tol, std::string(context) + ": channel B is not unital (||B(1) - 1|| = " +
                               std::to_string(unital) + ")");
}

detail::StackedSeries stack(const SuperOpSeries& s)
{
    const Eigen::Index rows = s[0].matrix().rows();
    detail::StackedSeries out(rows, s.size());
    for (std::size_t k = 0; k < s.size(); ++k) out.set(k, s[k].matrix());
    return out;
}

detail::ReversedKernel reversed(const std::vector<SuperOp>& s)
{
    std::vector<const Matrix*> refs;
    refs.reserve(s.size());
    for (const auto& v : s) refs.push_back(&v.matrix());
    return detail::ReversedKernel(refs);
}

// Trapezoid (N * X)(t_i) at every grid point.
std::vector<Matrix> trapezoid_convolution(const std::vector<SuperOp>& N, const SuperOpSeries& X)
{
    const double h = X.grid.step;
    const Eigen::Index rows = X[0].matrix().rows();
    const detail::ReversedKernel kernel = reversed(N);
    const detail::StackedSeries stacked = stack(X);
    std::vector<Matrix> out;
    out.reserve(X.size());
    out.push_back(Matrix::Zero(rows, rows));
    for (std::size_t i = 1; i < X.size(); ++i) {
        Matrix conv = kernel.interior_sum(i, stacked);
        conv.noalias() += 0.5 * N[i].matrix() * X[0].matrix();
        conv.noalias() += 0.5 * N[0].matrix() * X[i].matrix();
        out.push_back(h * conv);
    }
    return out;
}

} // namespace

std::optional<TimeGrid> KernelSpec::memory_grid() const
{
    if (const auto* s = std::get_if<ScalarCpMemory>(&memory)) return s->kappa.regular.grid;
    if (const auto* s = std::get_if<SplitMemory>(&memory)) return s->positive.grid;
    if (const auto* s = std::get_if<SampledMemory>(&memory)) return s->values.grid;
    return std::nullopt;
}

SuperOp KernelSpec::memory_at(std::size_t k) const
{
    if (const auto* s = std::get_if<ScalarCpMemory>(&memory)) {
        return s->kappa.regular.values[static_cast<Eigen::Index>(k)] *
               (s->channel - SuperOp::identity(dim));
    }
    if (const auto* s = std::get_if<SplitMemory>(&memory)) return s->positive[k] - s->normalizer[k];
    if (const auto* s = std::get_if<SampledMemory>(&memory)) return s->values[k];
    return SuperOp::zero(dim);
}

void KernelSpec::validate() const
{
    require(dim >= 1, "kernel dimension must be positive");
    if (local) require(local->dim() == dim, "kernel local part has the wrong dimension");
    if (const auto* s = std::get_if<ScalarCpMemory>(&memory)) {
        require(s->channel.dim() == dim, "scalar_cp channel has the wrong dimension");
        require(s->kappa.regular.values.size() == static_cast<Eigen::Index>(s->kappa.regular.grid.count),
                "scalar_cp kappa length does not match its grid");
        require(s->kappa.regular.grid.count >= 1, "scalar_cp kappa is empty");
    } else if (const auto* s = std::get_if<SplitMemory>(&memory)) {
        require_series(s->positive, dim, "split B_t");
        require_series(s->normalizer, dim, "split Z_t");
        require(s->positive.size() == s->normalizer.size() && s->positive.grid.same_step(s->normalizer.grid),
                "split B_t and Z_t are sampled on different grids");
        if (s->positive_local) require(s->positive_local->dim() == dim, "split B_local has the wrong dimension");
        if (s->normalizer_local) require(s->normalizer_local->dim() == dim, "split Z_local has the wrong dimension");
    } else if (const auto* s = std::get_if<SampledMemory>(&memory)) {
        require_series(s->values, dim, "sampled memory");
    }
}

SuperOpSeries memory_series(const KernelSpec& spec)
{
    const auto grid = spec.memory_grid();
    require(grid.has_value(), "memory_series: kernel has no memory part");
    SuperOpSeries out{*grid, {}};
    out.values.reserve(grid->count);
    for (std::size_t k = 0; k < grid->count; ++k) out.values.push_back(spec.memory_at(k));
    return out;
}

IdentityAnnihilation identity_annihilation(const KernelSpec& spec)
{
    IdentityAnnihilation out;
    if (spec.local) out.local = generator_defect(*spec.local);
    if (const auto grid = spec.memory_grid()) {
        for (std::size_t k = 0; k < grid->count; ++k)
            out.memory = std::max(out.memory, generator_defect(spec.memory_at(k)));
    }
    return out;
}

KernelSpec scalar_cp_kernel_unchecked(const ScalarKernel& kappa, const SuperOp& channel)
{
    KernelSpec spec;
    spec.dim = channel.dim();
    if (kappa.local_weight != 0.0) spec.local = kappa.local_weight * (channel - SuperOp::identity(spec.dim));
    spec.memory = ScalarCpMemory{kappa, channel};
    spec.validate();
    return spec;
}

KernelSpec make_scalar_cp_kernel(const ScalarKernel& kappa, const SuperOp& channel, std::optional<double> tol)
{
    require_channel(channel, resolve_tol(tol, channel.dim()), "make_scalar_cp_kernel");
    return scalar_cp_kernel_unchecked(kappa, channel);
}

NormalizerSynthesis z_from_F(const SuperOpSeries& F, std::optional<double> tol)
{
    const int dim = F.dim();
    require(dim >= 1, "z_from_F: empty F");
    require_series(F, dim, "F");
    require(F.size() >= 3, "z_from_F: need at least 3 samples to differentiate F");
    const double threshold = resolve_tol(tol, dim);
    const double h = F.grid.step;
    const std::size_t n = F.size();
    const Eigen::Index rows = static_cast<Eigen::Index>(dim) * dim;

    NormalizerSynthesis out;
    Matrix local = Matrix::Zero(rows, rows);
    if (norm(F[0]) > threshold) {
        local = F[0].matrix();
        out.local = F[0];
        out.warnings.push_back("||F_0|| = " + std::to_string(norm(F[0])) +
                               " > tol: Z carries a Dirac part W = F_0, returned as the local part");
    }

    // F' by second-order finite differences.
    std::vector<Matrix> derivative(n);
    derivative[0] = (-3.0 * F[0].matrix() + 4.0 * F[1].matrix() - F[2].matrix()) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) derivative[k] = (F[k + 1].matrix() - F[k - 1].matrix()) / (2.0 * h);
    derivative[n - 1] = (3.0 * F[n - 1].matrix() - 4.0 * F[n - 2].matrix() + F[n - 3].matrix()) / (2.0 * h);

    const Matrix diag = Matrix::Identity(rows, rows) - 0.5 * h * F[0].matrix();
    Eigen::FullPivLU<Matrix> lu(diag);
    if (lu.rcond() < 1e-12) {
        throw NumericalError("z_from_F: I - h F_0 / 2 is singular at step " + std::to_string(h));
    }

    const detail::ReversedKernel kernel = reversed(F.values);
    detail::StackedSeries stacked(rows, n);
    std::vector<Matrix> z(n);
    z[0] = derivative[0] + F[0].matrix() * local;
    stacked.set(0, z[0]);
    for (std::size_t i = 1; i < n; ++i) {
        Matrix hist = kernel.interior_sum(i, stacked);
        hist.noalias() += 0.5 * F[i].matrix() * z[0];
        Matrix rhs = derivative[i] + F[i].matrix() * local;
        rhs += h * hist;
        z[i] = lu.solve(rhs);
        stacked.set(i, z[i]);
        if (!(z[i].real().allFinite() && z[i].imag().allFinite())) {
            throw NumericalError("z_from_F: non-finite value at step " + std::to_string(i));
        }
    }

    out.regular.grid = F.grid;
    out.regular.values.reserve(n);
    for (auto& m : z) out.regular.values.emplace_back(std::move(m));
    out.convolution_residual = normalizer_residual(F, out.regular, out.local);
    return out;
}

double normalizer_residual(const SuperOpSeries& F, const SuperOpSeries& Z_regular,
                           const std::optional<SuperOp>& Z_local)
{
    require(F.size() == Z_regular.size(), "normalizer_residual: F and Z lengths differ");
    const int dim = F.dim();
    const double h = F.grid.step;
    const std::size_t n = F.size();

    // N_t = I - int_0^t F
    std::vector<SuperOp> N;
    N.reserve(n);
    N.push_back(SuperOp::identity(dim));
    for (std::size_t k = 1; k < n; ++k) N.push_back(N.back() - (0.5 * h) * (F[k - 1] + F[k]));

    const std::vector<Matrix> conv = trapezoid_convolution(N, Z_regular);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Matrix total = conv[i];
        if (Z_local) total += N[i].matrix() * Z_local->matrix();
        worst = std::max(worst, (total - F[i].matrix()).norm());
    }
    return worst;
}

SplitView split_view(const KernelSpec& spec, const TimeGrid& grid)
{
    spec.validate();
    if (const auto* s = std::get_if<SplitMemory>(&spec.memory)) {
        require(s->positive.grid.same_step(grid) && s->positive.size() >= grid.count,
                "split kernel does not cover the requested grid");
        SplitView view;
        view.positive = {grid, {s->positive.values.begin(), s->positive.values.begin() + grid.count}};
        view.normalizer = {grid, {s->normalizer.values.begin(), s->normalizer.values.begin() + grid.count}};
        view.positive_local = s->positive_local;
        view.normalizer_local = s->normalizer_local;
        return view;
    }
    if (const auto* s = std::get_if<ScalarCpMemory>(&spec.memory)) {
        const auto& kappa = s->kappa;
        require(kappa.regular.grid.same_step(grid) && kappa.regular.grid.count >= grid.count,
                "scalar_cp kernel does not cover the requested grid");
        const SuperOp identity = SuperOp::identity(spec.dim);
        SplitView view;
        view.positive.grid = grid;
        view.normalizer.grid = grid;
        for (std::size_t k = 0; k < grid.count; ++k) {
            const double w = kappa.regular.values[static_cast<Eigen::Index>(k)];
            view.positive.values.push_back(w * s->channel);
            view.normalizer.values.push_back(w * identity);
        }
        if (kappa.local_weight != 0.0) {
            view.positive_local = kappa.local_weight * s->channel;
            view.normalizer_local = kappa.local_weight * identity;
        }
        return view;
    }
    throw InvalidInput("split_view: kernel memory must be scalar_cp or split");
}

Theorem1Report theorem1_check(const KernelSpec& spec, const TimeGrid& grid, std::optional<double> tol)
{
    const SplitView view = split_view(spec, grid);
    Theorem1Report report;
    report.tolerance = resolve_tol(tol, spec.dim);

    report.min_positive_cp_defect = std::numeric_limits<double>::infinity();
    auto visit_positive = [&](const SuperOp& b) {
        const CpDefect cp = cp_defect(b);
        report.min_positive_cp_defect = std::min(report.min_positive_cp_defect, cp.min_eigenvalue);
        report.max_positive_herm_residual = std::max(report.max_positive_herm_residual, cp.hermiticity_residual);
    };
    for (const auto& b : view.positive.values) visit_positive(b);
    if (view.positive_local) visit_positive(*view.positive_local);
    report.positive_cp = report.min_positive_cp_defect >= -report.tolerance &&
                         report.max_positive_herm_residual <= report.tolerance;
    if (!report.positive_cp) {
        report.failures.push_back("B_t is not completely positive: min cp_defect " +
                                  std::to_string(report.min_positive_cp_defect));
    }

    for (std::size_t k = 0; k < grid.count; ++k) {
        report.annihilation.memory = std::max(
            report.annihilation.memory, generator_defect(view.positive[k] - view.normalizer[k]));
    }
    if (spec.local) report.annihilation.local = generator_defect(*spec.local);
    report.annihilates_identity = report.annihilation.memory <= report.tolerance &&
                                  report.annihilation.local <= report.tolerance;
    if (!report.annihilates_identity) {
        report.failures.push_back("L_t(1) != 0: max ||L_t(1)|| " + std::to_string(report.annihilation.memory) +
                                  ", ||L(1)|| " + std::to_string(report.annihilation.local));
    }

    const NormalizationSolution N = solve_normalization(view.normalizer, grid, view.normalizer_local);
    report.min_normalization_cp_defect = std::numeric_limits<double>::infinity();
    for (const auto& n : N.N.values)
        report.min_normalization_cp_defect = std::min(report.min_normalization_cp_defect, cp_defect(n).min_eigenvalue);
    report.normalization_cp = report.min_normalization_cp_defect >= -report.tolerance;
    if (!report.normalization_cp) {
        report.failures.push_back("N_t is not completely positive: min cp_defect " +
                                  std::to_string(report.min_normalization_cp_defect));
    }
    return report;
}

BreuerVacchiniReport breuer_vacchini_check(const NormalizationSolution& normalization,
                                           const SuperOpSeries& positive,
                                           const std::optional<SuperOp>& positive_local,
                                           std::optional<double> tol)
{
    const auto& N = normalization.N;
    require(N.grid.same_step(positive.grid), "breuer_vacchini_check: N and B_t use different grid steps");
    require(N.size() == positive.size(), "breuer_vacchini_check: N and B_t have different lengths");
    const int dim = N.dim();

    BreuerVacchiniReport report;
    report.tolerance = resolve_tol(tol, dim);
    report.convolution.grid = N.grid;
    report.min_cp_defect = std::numeric_limits<double>::infinity();
    std::vector<Matrix> convolution = trapezoid_convolution(N.values, positive);
    for (std::size_t i = 0; i < N.size(); ++i) {
        Matrix conv = std::move(convolution[i]);
        if (positive_local) conv += N[i].matrix() * positive_local->matrix();
        SuperOp m(std::move(conv));
        const double defect = cp_defect(m).min_eigenvalue;
        if (defect < report.min_cp_defect) {
            report.min_cp_defect = defect;
            report.worst_index = i;
        }
        report.convolution.values.push_back(std::move(m));
    }
    return report;
}

KernelSpec generalized_generator(const NormalizerSynthesis& normalizer, const SuperOp& channel,
                                 std::optional<double> tol)
{
    require_channel(channel, resolve_tol(tol, channel.dim()), "generalized_generator");
    require(normalizer.regular.dim() == channel.dim(), "generalized_generator: dimension mismatch");
    const int dim = channel.dim();
    const SuperOp shifted = channel - SuperOp::identity(dim);

    SplitMemory split;
    split.positive.grid = normalizer.regular.grid;
    split.normalizer = normalizer.regular;
    for (const auto& z : normalizer.regular.values) split.positive.values.push_back(z * channel);

    KernelSpec spec;
    spec.dim = dim;
    if (normalizer.local) {
        spec.local = *normalizer.local * shifted;
        split.positive_local = *normalizer.local * channel;
        split.normalizer_local = *normalizer.local;
    }
    spec.memory = std::move(split);
    spec.validate();
    return spec;
}

} // namespace memkernel
