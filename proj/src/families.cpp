#include "memkernel/families.hpp"

#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

namespace memkernel {

namespace {

using Matrix = Eigen::MatrixXcd;

void require_weights(const std::vector<double>& weights)
{
    double sum = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        require(std::isfinite(weights[j]) && weights[j] >= 0.0,
                "mixture weight " + std::to_string(j) + " must be non-negative");
        sum += weights[j];
    }
    require(std::abs(sum - 1.0) <= 1e-12, "mixture weights must sum to 1 (got " + std::to_string(sum) + ")");
}

void require_generators(const std::vector<SuperOp>& generators, double tol)
{
    require(!generators.empty(), "at least one generator is required");
    const int dim = generators.front().dim();
    for (std::size_t j = 0; j < generators.size(); ++j) {
        require(generators[j].dim() == dim, "generator " + std::to_string(j) + " has a different dimension");
        const double defect = generator_defect(generators[j]);
        require(defect <= tol, "generator " + std::to_string(j) + " does not annihilate the identity (||L(1)|| = " +
                                   std::to_string(defect) + ")");
    }
}

void require_commuting(const SuperOp& a, const SuperOp& b, const char* names)
{
    if (!commute(a, b)) {
        throw InvalidInput(std::string("closed-form mixture kernel needs commuting generators; ||[") + names +
                           "]|| = " + std::to_string(commutator(a, b).norm()));
    }
}

} // namespace

void MixtureSpec::validate(std::optional<double> tol) const
{
    require(weights.size() == generators.size(), "mixture needs one weight per generator");
    require_weights(weights);
    require_generators(generators, tol.value_or(default_tolerance(dim())));
}

void DilationSpec::validate(std::optional<double> tol) const
{
    require(system_dim >= 1 && env_dim >= 1, "dilation dimensions must be positive");
    require(system_dim * env_dim <= 16, "dilation: composite dimension " + std::to_string(system_dim * env_dim) +
                                            " exceeds the supported maximum of 16");
    require(total.dim() == system_dim * env_dim, "dilation: composite generator has dimension " +
                                                     std::to_string(total.dim()) + ", expected " +
                                                     std::to_string(system_dim * env_dim));
    require(omega.rows() == env_dim && omega.cols() == env_dim, "dilation: omega must be env_dim x env_dim");
    const double t = tol.value_or(default_tolerance(env_dim));
    require(is_hermitian(omega, t), "dilation: omega is not Hermitian");
    require(std::abs(omega.trace() - Complex(1.0)) <= 1e-12, "dilation: omega must have unit trace");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (omega + omega.adjoint()), Eigen::EigenvaluesOnly);
    require(solver.eigenvalues().minCoeff() >= -t, "dilation: omega is not positive semidefinite");
}

Operator ground_state(int env_dim)
{
    require(env_dim >= 1, "environment dimension must be positive");
    return matrix_unit(env_dim, 0, 0);
}

EvolutionTrace mixture_evolution(const MixtureSpec& spec, const TimeGrid& grid)
{
    spec.validate();
    EvolutionTrace trace;
    trace.grid = grid;
    trace.values.reserve(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) {
        SuperOp a = SuperOp::zero(spec.dim());
        for (std::size_t j = 0; j < spec.generators.size(); ++j) {
            if (spec.weights[j] == 0.0) continue;
            a += spec.weights[j] * expm(spec.generators[j], grid.time(k));
        }
        trace.values.push_back(std::move(a));
    }
    compute_diagnostics(trace);
    return trace;
}

bool commute(const SuperOp& a, const SuperOp& b)
{
    return commutator(a, b).norm() <= 1e-10 * norm(a) * norm(b);
}

KernelSpec mixture_kernel_n2(double x1, double x2, const SuperOp& L1, const SuperOp& L2, const TimeGrid& grid)
{
    require_weights({x1, x2});
    require_commuting(L1, L2, "L1, L2");

    const SuperOp diff = L1 - L2;
    const SuperOp weight = (x1 * x2) * (diff * diff);
    const SuperOp drift = x1 * L2 + x2 * L1;

    KernelSpec spec;
    spec.dim = L1.dim();
    spec.local = x1 * L1 + x2 * L2;
    SampledMemory memory;
    memory.values.grid = grid;
    memory.values.values.reserve(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) memory.values.values.push_back(weight * expm(drift, grid.time(k)));
    spec.memory = std::move(memory);
    spec.validate();
    return spec;
}

SuperOp mixture_kernel_n2_hat(double x1, double x2, const SuperOp& L1, const SuperOp& L2, double p)
{
    require_weights({x1, x2});
    require_commuting(L1, L2, "L1, L2");
    const int dim = L1.dim();
    const SuperOp diff = L1 - L2;
    const Matrix resolvent_arg = (p * SuperOp::identity(dim) - (x1 * L2 + x2 * L1)).matrix();
    Eigen::FullPivLU<Matrix> lu(resolvent_arg);
    if (lu.rcond() < 1e-12) throw NumericalError("mixture_kernel_n2_hat: p = " + std::to_string(p) + " is a pole");
    return x1 * L1 + x2 * L2 + SuperOp(((x1 * x2) * (diff * diff)).matrix() * lu.inverse());
}

SuperOp mixture_kernel_n3_hat(const std::vector<double>& weights, const SuperOp& L1, const SuperOp& L2,
                              const SuperOp& L3, double p)
{
    require(weights.size() == 3, "mixture_kernel_n3_hat needs exactly three weights");
    require_weights(weights);
    require_commuting(L1, L2, "L1, L2");
    require_commuting(L1, L3, "L1, L3");
    require_commuting(L2, L3, "L2, L3");
    const double x1 = weights[0], x2 = weights[1], x3 = weights[2];
    const SuperOp identity = SuperOp::identity(L1.dim());

    const SuperOp mean = x1 * L1 + x2 * L2 + x3 * L3;
    const SuperOp pair_sum = x1 * (L2 * L3) + x2 * (L1 * L3) + x3 * (L1 * L2);
    const SuperOp numerator = p * (x1 * (L1 * L1) + x2 * (L2 * L2) + x3 * (L3 * L3) - mean * mean) +
                              L1 * L2 * L3 - mean * pair_sum;
    const SuperOp denominator = (p * p) * identity - p * (L1 + L2 + L3 - mean) + pair_sum;

    Eigen::FullPivLU<Matrix> lu(denominator.matrix());
    if (lu.rcond() < 1e-12) throw NumericalError("mixture_kernel_n3_hat: C_p is singular at p = " + std::to_string(p));
    return mean + SuperOp(numerator.matrix() * lu.inverse());
}

TimeMixtureResult time_mixture_evolution(const TimeMixtureSpec& spec, const TimeGrid& grid,
                                         std::optional<double> tol)
{
    require(spec.weights.size() == spec.generators.size(), "time mixture needs one weight function per generator");
    const int dim = spec.dim();
    const double t = tol.value_or(default_tolerance(dim));
    require_generators(spec.generators, t);

    const std::size_t n = grid.count;
    std::vector<Eigen::VectorXd> x;
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < spec.weights.size(); ++j) {
        x.push_back(spec.weights[j].sample(grid));
        require(x.back().minCoeff() >= -t, "time mixture weight " + std::to_string(j) + " is negative");
        mass += cumulative_trapezoid(x.back(), grid.step);
    }
    require(mass[mass.size() - 1] <= 1.0 + t,
            "time mixture violates sum_j int_0^T x_j <= 1 (got " + std::to_string(mass[mass.size() - 1]) + ")");

    const SuperOp identity = SuperOp::identity(dim);
    TimeMixtureResult out;
    out.trace.grid = grid;
    out.G.grid = grid;

    std::vector<SuperOp> previous_integrand(spec.generators.size(), SuperOp::zero(dim));
    SuperOp accumulated = SuperOp::zero(dim);
    for (std::size_t k = 0; k < n; ++k) {
        SuperOp g = SuperOp::zero(dim);
        for (std::size_t j = 0; j < spec.generators.size(); ++j) {
            const double xj = x[j][static_cast<Eigen::Index>(k)];
            const SuperOp semigroup = expm(spec.generators[j], grid.time(k));
            const SuperOp integrand = xj * semigroup;
            if (k > 0) accumulated += (0.5 * grid.step) * (previous_integrand[j] + integrand);
            previous_integrand[j] = integrand;
            g += xj * (semigroup - identity);
        }
        out.trace.values.push_back((1.0 - mass[static_cast<Eigen::Index>(k)]) * identity + accumulated);
        out.G.values.push_back(std::move(g));
    }
    compute_diagnostics(out.trace);
    return out;
}

EvolutionTrace dilation_reduced(const DilationSpec& spec, const TimeGrid& grid)
{
    spec.validate();
    const int d = spec.system_dim;
    const int k = spec.env_dim;
    const int dk = d * k;
    const Operator env_one = Operator::Identity(k, k);

    // vec(a) -> vec(a (x) 1)
    Matrix embed(dk * dk, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            embed.col(i + j * d) = vec(Eigen::kroneckerProduct(matrix_unit(d, i, j), env_one).eval());

    // vec(X) -> vec(tr_env[(1 (x) omega) X])
    const Operator weighted = Eigen::kroneckerProduct(Operator::Identity(d, d), spec.omega).eval();
    Matrix reduce(d * d, dk * dk);
    for (int I = 0; I < dk; ++I) {
        for (int J = 0; J < dk; ++J) {
            const Operator x = weighted * matrix_unit(dk, I, J);
            Operator y = Operator::Zero(d, d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int mu = 0; mu < k; ++mu) y(a, b) += x(a * k + mu, b * k + mu);
            reduce.col(I + J * dk) = vec(y);
        }
    }

    const SuperOp generator = gksl_generator(spec.total, Picture::heisenberg);
    EvolutionTrace trace;
    trace.grid = grid;
    trace.values.reserve(grid.count);
    for (std::size_t step = 0; step < grid.count; ++step) {
        const SuperOp propagator = expm(generator, grid.time(step));
        trace.values.emplace_back((reduce * propagator.matrix() * embed).eval());
    }
    compute_diagnostics(trace);
    return trace;
}

} // namespace memkernel
