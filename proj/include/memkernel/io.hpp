// io.hpp — JSON encodings of operators, superoperators, memory functions, kernels and families
//
// Operators are {"re": [[...], ...], "im": [[...], ...]} with rows listed in
// order ("im" optional), or a bare array of real rows. Superoperators accept
// one of
//     {"matrix": operator}                     d^2 x d^2 in column-stacking vec convention
//     {"gksl": {"hamiltonian", "jumps": [{"op", "rate"}], "picture"}}
//     {"conjugation": operator}                a -> u a u^dag
//     {"kraus": [operator, ...]}               a -> sum v^dag a v
//     {"identity": d}, {"zero": d}, {"transpose": d}
// optionally with "scale": number.

#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "memkernel/families.hpp"
#include "memkernel/kernels.hpp"
#include "memkernel/memory.hpp"
#include "memkernel/types.hpp"

namespace memkernel {

using Json = nlohmann::json;

// Input error located at a JSON pointer.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& pointer, const std::string& message);
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

// Read-only cursor into a JSON document that tracks its JSON pointer.
class JsonNode {
public:
    explicit JsonNode(const Json& value, std::string pointer = "");

    const Json& value() const { return *value_; }
    const std::string& pointer() const { return pointer_; }

    bool has(const std::string& key) const;
    JsonNode at(const std::string& key) const;
    std::optional<JsonNode> find(const std::string& key) const;
    JsonNode at(std::size_t index) const;
    std::size_t size() const;

    double number() const;
    double positive() const;
    int integer() const;
    std::string string() const;
    bool boolean() const;
    std::vector<double> numbers() const;

    [[noreturn]] void fail(const std::string& message) const;

private:
    const Json* value_;
    std::string pointer_;
};

Operator parse_operator(const JsonNode& node);
Json operator_to_json(const Operator& op);

GkslSpec parse_gksl(const JsonNode& node);
SuperOp parse_superop(const JsonNode& node);
Json superop_to_json(const SuperOp& op);

MemoryFunction parse_memory_function(const JsonNode& node);
Json memory_function_to_json(const MemoryFunction& f);

// {"h", "values": [superop, ...]} or {"f": memory function, "times": superop}.
SuperOpSeries parse_series(const JsonNode& node, const TimeGrid& grid);

// {"local": superop | null, "dim", "memory": {"type": ...}}; memory types
//     none
//     scalar_cp    {"f": memory function, "B"} or {"kappa": {"h", "values"}, "local_weight", "B"}
//     split        {"positive": series, "normalizer": series, "positive_local", "normalizer_local"}
//     sampled      {"values": series}
//     mixture_n2   {"weights": [x1, x2], "generators": [L1, L2]}
//     generalized  {"F": series, "B"}
// Scalar CP kernels are built without the CP gate so that they can be certified afterwards.
KernelSpec parse_kernel(const JsonNode& node, const TimeGrid& grid, std::optional<double> tol = std::nullopt);

MixtureSpec parse_mixture(const JsonNode& node);
TimeMixtureSpec parse_time_mixture(const JsonNode& node);
DilationSpec parse_dilation(const JsonNode& node);

} // namespace memkernel
