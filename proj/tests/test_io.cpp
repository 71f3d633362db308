#include <doctest.h>

#include <functional>

#include "memkernel/io.hpp"
#include "test_support.hpp"

using namespace memkernel;
using namespace memkernel::testing;

namespace {

Json parse(const char* text) { return Json::parse(text); }

std::string error_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const InvalidInput& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("parse_operator")
{
    const Json real = parse("[[1, 2], [3, 4]]");
    const Operator a = parse_operator(JsonNode(real));
    CHECK(a(0, 1) == Complex(2.0));
    CHECK(a(1, 0) == Complex(3.0));

    const Json complex = parse(R"({"re": [[0, 0], [0, 0]], "im": [[0, -1], [1, 0]]})");
    CHECK((parse_operator(JsonNode(complex)) - pauli::y()).norm() == 0.0);

    SUBCASE("round trip")
    {
        Rng rng(1);
        const Operator m = random_operator(3, rng);
        const Json j = operator_to_json(m);
        CHECK((parse_operator(JsonNode(j)) - m).norm() == 0.0);
    }
    SUBCASE("errors carry the JSON pointer")
    {
        const Json bad = parse(R"({"op": {"re": [[1, 2], [3]]}})");
        const std::string msg = error_of([&] { parse_operator(JsonNode(bad).at("op")); });
        CHECK(msg.find("/op/re/1") == 0);
        const Json text = parse(R"({"re": [["a", 0], [0, 1]]})");
        CHECK(error_of([&] { parse_operator(JsonNode(text)); }).find("/re/0/0") == 0);
    }
}

TEST_CASE("parse_superop")
{
    CHECK(norm(parse_superop(JsonNode(parse(R"({"identity": 2})"))) - SuperOp::identity(2)) == 0.0);
    CHECK(norm(parse_superop(JsonNode(parse(R"({"transpose": 2})"))) - transpose_map(2)) == 0.0);
    CHECK(norm(parse_superop(JsonNode(parse(R"({"conjugation": [[0, 1], [1, 0]]})"))) - conjugation(pauli::x())) ==
          0.0);
    CHECK(norm(parse_superop(JsonNode(parse(R"({"identity": 2, "scale": 0.5})"))) - 0.5 * SuperOp::identity(2)) ==
          0.0);

    const SuperOp gksl = parse_superop(JsonNode(
        parse(R"({"gksl": {"hamiltonian": [[0, 0], [0, 0]], "jumps": [{"op": [[1, 0], [0, -1]], "rate": 1.5}]}})")));
    CHECK(norm(gksl - dephasing(1.5)) < 1e-15);

    const SuperOp kraus = parse_superop(JsonNode(parse(R"({"kraus": [[[0, 1], [1, 0]]]})")));
    CHECK(norm(kraus - conjugation(pauli::x())) < 1e-15);

    SUBCASE("round trip through the matrix form")
    {
        Rng rng(2);
        const SuperOp s = random_cp_map(2, 2, rng);
        const Json j = superop_to_json(s);
        CHECK(norm(parse_superop(JsonNode(j)) - s) == 0.0);
    }
    SUBCASE("errors")
    {
        CHECK(error_of([] { parse_superop(JsonNode(parse(R"({"identity": 2, "zero": 2})"))); }).find("ambiguous") !=
              std::string::npos);
        CHECK(error_of([] { parse_superop(JsonNode(parse(R"({"unknown": 2})"))); }).find("expected one of") !=
              std::string::npos);
        CHECK(error_of([] { parse_superop(JsonNode(parse(R"({"matrix": [[1, 0], [0, 1]]})"))); }).find("/matrix") ==
              0);
        CHECK(error_of([] {
                  parse_superop(JsonNode(parse(R"({"gksl": {"hamiltonian": [[0, 1], [0, 0]]}})")));
              }).find("/gksl") == 0);
        const Json negative_rate = parse(
            R"({"gksl": {"hamiltonian": [[0, 0], [0, 0]], "jumps": [{"op": [[1, 0], [0, 1]], "rate": -1}]}})");
        CHECK(error_of([&] { parse_superop(JsonNode(negative_rate)); }).find("/gksl/jumps/0/rate") == 0);
    }
}

TEST_CASE("parse_memory_function")
{
    const MemoryFunction e = parse_memory_function(JsonNode(parse(R"({"kind": "erlang", "gamma": 2, "order": 3})")));
    const auto* erlang = std::get_if<Erlang>(&e.kind());
    REQUIRE(erlang != nullptr);
    CHECK(erlang->gamma == 2.0);
    CHECK(erlang->order == 3);
    CHECK(erlang->scale == 1.0);

    const MemoryFunction s = parse_memory_function(JsonNode(parse(R"({"kind": "samples", "h": 0.1, "values": [1, 2]})")));
    CHECK(std::get<Samples>(s.kind()).values.size() == 2);

    CHECK(std::holds_alternative<ZeroMemory>(parse_memory_function(JsonNode(parse(R"({"kind": "zero"})"))).kind()));

    SUBCASE("round trip")
    {
        for (const MemoryFunction& f : {MemoryFunction::erlang(1.5, 2, 0.5), MemoryFunction::samples(0.2, {1, 0.5}),
                                        MemoryFunction::zero()}) {
            const Json j = memory_function_to_json(f);
            CHECK(memory_function_to_json(parse_memory_function(JsonNode(j))) == j);
        }
    }
    SUBCASE("errors")
    {
        CHECK(error_of([] { parse_memory_function(JsonNode(parse(R"({"kind": "erlang", "gamma": -1, "order": 2})"))); })
                  .find("/gamma") == 0);
        CHECK(error_of([] { parse_memory_function(JsonNode(parse(R"({"kind": "erlang", "gamma": 1, "order": 1.5})"))); })
                  .find("/order") == 0);
        CHECK(error_of([] { parse_memory_function(JsonNode(parse(R"({"kind": "gauss"})"))); }).find("/kind") == 0);
    }
}

TEST_CASE("parse_kernel")
{
    const TimeGrid grid = TimeGrid::covering(0.01, 2.0);

    SUBCASE("zero kernel")
    {
        const KernelSpec spec =
            parse_kernel(JsonNode(parse(R"({"dim": 3, "memory": {"type": "none"}})")), grid);
        CHECK(spec.dim == 3);
        CHECK_FALSE(spec.local.has_value());
        CHECK_FALSE(spec.has_memory());
    }
    SUBCASE("scalar CP kernel from f matches the library construction")
    {
        const KernelSpec spec = parse_kernel(JsonNode(parse(R"({"memory": {"type": "scalar_cp",
            "f": {"kind": "erlang", "gamma": 1, "order": 2}, "B": {"conjugation": [[0, 1], [1, 0]]}}})")),
                                             grid);
        const KernelSpec direct =
            make_scalar_cp_kernel(kappa_from_f(MemoryFunction::erlang(1.0, 2), grid).kernel, conjugation(pauli::x()));
        for (std::size_t k = 0; k < grid.count; k += 20) CHECK(norm(spec.memory_at(k) - direct.memory_at(k)) == 0.0);
    }
    SUBCASE("transpose-based kernels are accepted for later certification")
    {
        const KernelSpec spec = parse_kernel(JsonNode(parse(R"({"memory": {"type": "scalar_cp",
            "f": {"kind": "erlang", "gamma": 1, "order": 2}, "B": {"transpose": 2}}})")),
                                             grid);
        CHECK(spec.has_memory());
    }
    SUBCASE("local part is added to the memory's Dirac part")
    {
        const KernelSpec spec = parse_kernel(JsonNode(parse(R"({"local": {"identity": 2, "scale": 0},
            "memory": {"type": "scalar_cp", "f": {"kind": "erlang", "gamma": 2, "order": 1},
                       "B": {"conjugation": [[1, 0], [0, -1]]}}})")),
                                             grid);
        REQUIRE(spec.local.has_value());
        CHECK(norm(*spec.local - 2.0 * (conjugation(pauli::z()) - SuperOp::identity(2))) < 1e-12);
    }
    SUBCASE("split kernel from f times a superoperator")
    {
        const KernelSpec spec = parse_kernel(JsonNode(parse(R"({"memory": {"type": "split",
            "positive": {"f": {"kind": "erlang", "gamma": 1, "order": 2}, "times": {"conjugation": [[0, 1], [1, 0]]}},
            "normalizer": {"f": {"kind": "erlang", "gamma": 1, "order": 2}, "times": {"identity": 2}}}})")),
                                             grid);
        CHECK(std::holds_alternative<SplitMemory>(spec.memory));
        CHECK(identity_annihilation(spec).memory < 1e-15);
    }
    SUBCASE("sampled kernel with explicit values")
    {
        const Json j = parse(R"({"memory": {"type": "sampled", "values": {"h": 0.5, "values": [{"zero": 2}, {"zero": 2}, {"zero": 2}]}}})");
        const KernelSpec spec = parse_kernel(JsonNode(j), TimeGrid(0.5, 3));
        CHECK(spec.dim == 2);
        CHECK(error_of([&] { parse_kernel(JsonNode(j), TimeGrid(0.25, 3)); }).find("/memory/values/h") == 0);
        CHECK(error_of([&] { parse_kernel(JsonNode(j), TimeGrid(0.5, 5)); }).find("/memory/values/values") == 0);
    }
    SUBCASE("two-generator mixture kernel")
    {
        const KernelSpec spec = parse_kernel(JsonNode(parse(R"({"memory": {"type": "mixture_n2", "weights": [0.5, 0.5],
            "generators": [{"gksl": {"hamiltonian": [[0, 0], [0, 0]], "jumps": [{"op": [[1, 0], [0, -1]], "rate": 1}]}},
                           {"gksl": {"hamiltonian": [[0, 0], [0, 0]], "jumps": [{"op": [[1, 0], [0, -1]], "rate": 3}]}}]}})")),
                                             grid);
        CHECK(norm(*spec.local - (0.5 * dephasing(1.0) + 0.5 * dephasing(3.0))) < 1e-14);
    }
    SUBCASE("errors carry the JSON pointer")
    {
        CHECK(error_of([&] { parse_kernel(JsonNode(parse(R"({"memory": {"type": "odd"}})")), grid); })
                  .find("/memory/type") == 0);
        CHECK(error_of([&] { parse_kernel(JsonNode(parse(R"({"memory": {"type": "none"}})")), grid); }).find("/:") ==
              0);
        CHECK(error_of([&] {
                  parse_kernel(JsonNode(parse(R"({"local": {"identity": 3}, "memory": {"type": "scalar_cp",
                      "f": {"kind": "zero"}, "B": {"identity": 2}}})")),
                               grid);
              }).find("/local") == 0);
    }
}

TEST_CASE("parse families")
{
    const MixtureSpec m = parse_mixture(JsonNode(parse(R"({"weights": [0.25, 0.75],
        "generators": [{"zero": 2}, {"gksl": {"hamiltonian": [[1, 0], [0, -1]]}}]})")));
    CHECK(m.weights[1] == 0.75);
    CHECK(m.dim() == 2);
    CHECK(error_of([] { parse_mixture(JsonNode(parse(R"({"weights": [0.5, 0.6], "generators": [{"zero": 2}, {"zero": 2}]})"))); })
              .find("sum to 1") != std::string::npos);
    CHECK(error_of([] { parse_mixture(JsonNode(parse(R"({"weights": [0.5, 0.5], "generators": [{"zero": 2}, {"zero": 3}]})"))); })
              .find("/generators/1") == 0);

    const TimeMixtureSpec t = parse_time_mixture(JsonNode(parse(R"({"weights": [{"kind": "erlang", "gamma": 1, "order": 1}],
        "generators": [{"zero": 2}]})")));
    CHECK(t.weights.size() == 1);
    CHECK_THROWS_AS(parse_time_mixture(JsonNode(parse(R"({"weights": [], "generators": [{"zero": 2}]})"))), ConfigError);

    const DilationSpec d = parse_dilation(JsonNode(parse(R"({"system_dim": 2, "env_dim": 2,
        "total": {"hamiltonian": [[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]]}})")));
    CHECK((d.omega - ground_state(2)).norm() == 0.0);
    CHECK(error_of([] {
              parse_dilation(JsonNode(parse(R"({"system_dim": 2, "env_dim": 2, "omega": [[1, 0], [0, 1]],
                  "total": {"hamiltonian": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]}})")));
          }).find("unit trace") != std::string::npos);
}
