#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "memkernel/families.hpp"
#include "test_support.hpp"

using namespace memkernel;
using namespace memkernel::testing;

namespace {

SuperOp rotation_x(double omega) { return gksl_generator(GkslSpec{omega * pauli::x(), {}}); }

Operator kron(const Operator& a, const Operator& b)
{
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace

TEST_CASE("mixture_evolution")
{
    const TimeGrid grid = TimeGrid::covering(0.05, 3.0);
    Rng rng(21);

    SUBCASE("degenerate weights give a single semigroup")
    {
        const SuperOp l1 = gksl_generator(random_gksl_spec(2, 2, rng));
        const SuperOp l2 = gksl_generator(random_gksl_spec(2, 1, rng));
        const EvolutionTrace trace = mixture_evolution({{1.0, 0.0}, {l1, l2}}, grid);
        for (std::size_t k = 0; k < grid.count; ++k) CHECK(norm(trace.values[k] - expm(l1, grid.time(k))) < 1e-13);
    }
    SUBCASE("half dephasing, half identity: coherence factor (1 + exp(-2 gamma t)) / 2")
    {
        const double gamma = 0.7;
        const EvolutionTrace trace = mixture_evolution({{0.5, 0.5}, {dephasing(gamma), SuperOp::zero(2)}}, grid);
        for (std::size_t k = 0; k < grid.count; ++k) {
            const double factor = 0.5 * (1.0 + std::exp(-2.0 * gamma * grid.time(k)));
            CHECK((superop_apply(trace.values[k], pauli::x()) - factor * pauli::x()).norm() < 1e-13);
            CHECK((superop_apply(trace.values[k], pauli::z()) - pauli::z()).norm() < 1e-13);
        }
    }
    SUBCASE("three random generators stay CP and unital")
    {
        for (int trial = 0; trial < 3; ++trial) {
            std::uniform_real_distribution<double> u(0.1, 1.0);
            std::vector<double> x{u(rng), u(rng), u(rng)};
            const double sum = x[0] + x[1] + x[2];
            for (auto& v : x) v /= sum;
            x[2] = 1.0 - x[0] - x[1];
            MixtureSpec spec{x, {}};
            for (int j = 0; j < 3; ++j) spec.generators.push_back(gksl_generator(random_gksl_spec(2, 2, rng)));
            const EvolutionTrace trace = mixture_evolution(spec, grid);
            CHECK(trace.min_cp_defect() >= -1e-10);
            CHECK(trace.max_unitality_defect() <= 3.0 * default_tolerance(2));
        }
    }
    SUBCASE("invalid specs")
    {
        const SuperOp l = dephasing(1.0);
        CHECK_THROWS_AS(mixture_evolution({{0.5, 0.4}, {l, l}}, grid), InvalidInput);
        CHECK_THROWS_AS(mixture_evolution({{1.5, -0.5}, {l, l}}, grid), InvalidInput);
        CHECK_THROWS_AS(mixture_evolution({{1.0}, {l, l}}, grid), InvalidInput);
        CHECK_THROWS_AS(mixture_evolution({{1.0}, {sandwich(pauli::x(), Operator::Identity(2, 2))}}, grid),
                        InvalidInput);
    }
}

TEST_CASE("commute")
{
    CHECK(commute(dephasing(1.0), dephasing(3.0)));
    CHECK_FALSE(commute(dephasing(1.0), rotation_x(1.0)));
    CHECK(commute(SuperOp::zero(2), rotation_x(1.0)));
    // Pauli channels commute with each other.
    CHECK(commute(dephasing(1.0), gksl_generator(GkslSpec{Operator::Zero(2, 2), {{pauli::x(), 2.0}}})));
}

TEST_CASE("mixture_kernel_n2")
{
    const TimeGrid grid = TimeGrid::covering(2e-3, 5.0);

    SUBCASE("equal generators: no memory")
    {
        const SuperOp l = dephasing(1.3);
        const KernelSpec spec = mixture_kernel_n2(0.3, 0.7, l, l, grid);
        REQUIRE(spec.local.has_value());
        CHECK(norm(*spec.local - l) < 1e-15);
        for (std::size_t k = 0; k < grid.count; k += 100) CHECK(norm(spec.memory_at(k)) == 0.0);
        const EvolutionTrace trace = evolve(spec, TimeGrid::covering(2e-3, 1.0));
        CHECK(norm(trace.values.back() - expm(l, 1.0)) < 5.0 * 2e-3 * 2e-3);
    }
    SUBCASE("unit weight: no memory")
    {
        const KernelSpec spec = mixture_kernel_n2(1.0, 0.0, dephasing(1.0), dephasing(2.0), grid);
        CHECK(norm(*spec.local - dephasing(1.0)) < 1e-15);
        CHECK(norm(spec.memory_at(7)) == 0.0);
    }
    SUBCASE("dephasing pair: scalar kernel 4 exp(-4t) on the coherences")
    {
        const SuperOp l1 = dephasing(1.0), l2 = dephasing(3.0);
        const KernelSpec spec = mixture_kernel_n2(0.5, 0.5, l1, l2, grid);
        for (std::size_t k = 0; k < grid.count; k += 250) {
            const double expected = 4.0 * std::exp(-4.0 * grid.time(k));
            const SuperOp m = spec.memory_at(k);
            CHECK((superop_apply(m, pauli::x()) - expected * pauli::x()).norm() < 1e-12);
            CHECK((superop_apply(m, pauli::y()) - expected * pauli::y()).norm() < 1e-12);
            CHECK((superop_apply(m, pauli::z())).norm() < 1e-12);
            CHECK((superop_apply(m, Operator::Identity(2, 2))).norm() < 1e-12);
        }
        // Coherence eigenvalue of the local part is -(2 + 6) / 2.
        CHECK((superop_apply(*spec.local, pauli::x()) + 4.0 * pauli::x()).norm() < 1e-12);

        const TimeGrid long_grid = TimeGrid::covering(1e-3, 15.0);
        const KernelSpec long_spec = mixture_kernel_n2(0.5, 0.5, l1, l2, long_grid);
        for (double p : {1.0, 2.0, 5.0}) {
            const SuperOp closed = mixture_kernel_n2_hat(0.5, 0.5, l1, l2, p);
            // Coherence eigenvalue of L_hat: -4 + 4 / (p + 4).
            CHECK((superop_apply(closed, pauli::x()) - (-4.0 + 4.0 / (p + 4.0)) * pauli::x()).norm() < 1e-12);
            const LaplaceSample numeric = kernel_laplace(long_spec, p);
            CHECK(norm(numeric.value - closed) < 1e-5);
        }
    }
    SUBCASE("evolving the kernel reproduces the mixture")
    {
        const SuperOp l1 = dephasing(0.5), l2 = dephasing(2.0);
        const KernelSpec spec = mixture_kernel_n2(0.3, 0.7, l1, l2, grid);
        const EvolutionTrace evolved = evolve(spec, grid);
        const EvolutionTrace direct = mixture_evolution({{0.3, 0.7}, {l1, l2}}, grid);
        CHECK(series_distance(evolved.values, direct.values) <= 1e-5);
    }
    SUBCASE("non-commuting generators are rejected")
    {
        CHECK_THROWS_AS(mixture_kernel_n2(0.5, 0.5, dephasing(1.0), rotation_x(1.0), grid), InvalidInput);
        CHECK_THROWS_AS(mixture_kernel_n2_hat(0.5, 0.5, dephasing(1.0), rotation_x(1.0), 1.0), InvalidInput);
        CHECK_THROWS_AS(mixture_kernel_n2(0.6, 0.6, dephasing(1.0), dephasing(2.0), grid), InvalidInput);
    }
}

TEST_CASE("mixture_kernel_n3_hat")
{
    Rng rng(31);
    const SuperOp l1 = random_diagonal_generator(2, rng);
    const SuperOp l2 = random_diagonal_generator(2, rng);
    const SuperOp l3 = random_diagonal_generator(2, rng);

    for (double p : {1.0, 2.0, 5.0}) {
        CHECK(norm(mixture_kernel_n3_hat({1.0, 0.0, 0.0}, l1, l2, l3, p) - l1) < 1e-12);
        CHECK(norm(mixture_kernel_n3_hat({0.2, 0.3, 0.5}, l2, l2, l2, p) - l2) < 1e-12);
    }

    SUBCASE("two equal generators reduce to the n = 2 closed form")
    {
        for (double p : {1.0, 3.0})
            CHECK(norm(mixture_kernel_n3_hat({0.2, 0.3, 0.5}, l1, l2, l2, p) -
                       mixture_kernel_n2_hat(0.2, 0.8, l1, l2, p)) < 1e-10);
    }
    SUBCASE("matches the kernel extracted from the mixture trace")
    {
        const std::vector<double> x{0.2, 0.5, 0.3};
        const double scale = std::max({norm(l1), norm(l2), norm(l3)});
        const TimeGrid grid = TimeGrid::covering(1e-3 / scale, 20.0);
        const EvolutionTrace trace = mixture_evolution({x, {l1, l2, l3}}, grid);
        const auto numeric = kernel_from_G(extract_G(trace), {1.0, 2.0, 5.0});
        for (const auto& r : numeric) {
            CHECK(norm(r.kernel - mixture_kernel_n3_hat(x, l1, l2, l3, r.p)) < 1e-4);
            CHECK(r.tail_bound <= 1e-6);
        }
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(mixture_kernel_n3_hat({0.5, 0.5}, l1, l2, l3, 1.0), InvalidInput);
        CHECK_THROWS_AS(mixture_kernel_n3_hat({0.5, 0.5, 0.0}, dephasing(1.0), rotation_x(1.0), l3, 1.0),
                        InvalidInput);
    }
}

TEST_CASE("time_mixture_evolution")
{
    const double gamma = 1.0, h = 1e-2;
    const TimeGrid grid = TimeGrid::covering(h, 8.0);
    const SuperOp identity = SuperOp::identity(2);

    SUBCASE("zero weights give the identity")
    {
        const TimeMixtureResult r = time_mixture_evolution({{MemoryFunction::zero()}, {dephasing(1.0)}}, grid);
        for (const auto& a : r.trace.values) CHECK(norm(a - identity) == 0.0);
    }
    SUBCASE("mixture of identities")
    {
        const TimeMixtureResult r =
            time_mixture_evolution({{MemoryFunction::erlang(gamma, 1)}, {SuperOp::zero(2)}}, grid);
        for (const auto& a : r.trace.values) CHECK(norm(a - identity) < 1e-14);
    }
    SUBCASE("exponential weight with dephasing")
    {
        const TimeMixtureResult r =
            time_mixture_evolution({{MemoryFunction::erlang(gamma, 1)}, {dephasing(gamma)}}, grid);
        CHECK(r.trace.min_cp_defect() >= -1e-7);
        CHECK(r.trace.max_unitality_defect() <= 1e-7);

        // Coherence: 1 - int x + int x e^{-2 gamma s} = e^{-gamma t} + (1 - e^{-3 gamma t}) / 3.
        for (std::size_t k = 0; k < grid.count; k += 50) {
            const double t = grid.time(k);
            const double expected = std::exp(-gamma * t) + (1.0 - std::exp(-3.0 * gamma * t)) / 3.0;
            CHECK(std::abs(superop_apply(r.trace.values[k], pauli::x())(0, 1) - expected) < h * h);
        }

        SuperOp integral = SuperOp::zero(2);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.count; ++k) {
            if (k > 0) integral += (0.5 * h) * (r.G[k - 1] + r.G[k]);
            worst = std::max(worst, norm(r.trace.values[k] - (identity + integral)));
        }
        CHECK(worst <= h * h);

        const GRepresentation rep = extract_G(r.trace);
        CHECK(series_distance(rep.G.values, r.G.values) <= 10.0 * h * h);
    }
    SUBCASE("constraint violations are rejected")
    {
        CHECK_THROWS_AS(time_mixture_evolution({{MemoryFunction::erlang(gamma, 1, 2.0)}, {dephasing(1.0)}}, grid),
                        InvalidInput);
        CHECK_THROWS_AS(
            time_mixture_evolution({{MemoryFunction::samples(h, std::vector<double>(grid.count, -0.1))}, {dephasing(1.0)}},
                                   grid),
            InvalidInput);
    }
}

TEST_CASE("dilation_reduced")
{
    const TimeGrid grid = TimeGrid::covering(0.02, 4.0);
    const Operator one = Operator::Identity(2, 2);

    SUBCASE("decoupled environment")
    {
        Rng rng(41);
        const GkslSpec system = random_gksl_spec(2, 1, rng);
        DilationSpec spec{2, 2, {kron(system.hamiltonian, one) + kron(one, pauli::z()), {}}, ground_state(2)};
        spec.total.jumps.push_back({kron(system.jumps[0].op, one), system.jumps[0].rate});
        spec.total.jumps.push_back({kron(one, pauli::minus()), 0.8});
        const SuperOp l_sys = gksl_generator(system);
        const EvolutionTrace trace = dilation_reduced(spec, grid);
        CHECK(norm(trace.values.front() - SuperOp::identity(2)) < 1e-14);
        for (std::size_t k = 0; k < grid.count; k += 20) CHECK(norm(trace.values[k] - expm(l_sys, grid.time(k))) < 1e-10);
    }
    SUBCASE("exchange model")
    {
        const double g = 1.0, gamma = 0.5;
        const Operator h = g * (kron(pauli::plus(), pauli::minus()) + kron(pauli::minus(), pauli::plus()));
        const DilationSpec spec{2, 2, {h, {{kron(one, pauli::minus()), gamma}}}, ground_state(2)};
        const TimeGrid long_grid = TimeGrid::covering(2e-3, 40.0);
        const EvolutionTrace trace = dilation_reduced(spec, long_grid);
        CHECK(trace.min_cp_defect() >= -1e-7);
        CHECK(trace.max_unitality_defect() <= 1e-7);
        CHECK(norm(trace.values.front() - SuperOp::identity(2)) < 1e-14);

        const GRepresentation rep = extract_G(trace);
        CHECK(rep.max_identity_defect <= 1e-6);
        for (const auto& r : kernel_from_G(rep, {1.0, 2.0, 5.0})) {
            CHECK(r.resolvent_residual <= 1e-3);
            CHECK(r.tail_bound <= 1e-6);
        }
    }
    SUBCASE("invalid specs")
    {
        const GkslSpec total{Operator::Zero(4, 4), {}};
        CHECK_THROWS_AS(dilation_reduced({2, 2, total, 2.0 * ground_state(2)}, grid), InvalidInput);
        CHECK_THROWS_AS(dilation_reduced({2, 2, total, Operator(pauli::z() + 0.5 * one)}, grid), InvalidInput);
        CHECK_THROWS_AS(dilation_reduced({2, 3, total, ground_state(3)}, grid), InvalidInput);
        CHECK_THROWS_AS(dilation_reduced({4, 5, GkslSpec{Operator::Zero(20, 20), {}}, ground_state(5)}, grid),
                        InvalidInput);
    }
}
