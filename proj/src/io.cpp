#include "memkernel/io.hpp"

#include <cmath>

namespace memkernel {

namespace {

std::string escape_pointer(const std::string& key)
{
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

std::string type_name(const Json& j) { return j.type_name(); }

SuperOp scaled(const JsonNode& node, SuperOp op)
{
    if (const auto s = node.find("scale")) op *= Complex(s->number());
    return op;
}

// Exactly one of the listed keys must be present.
std::string choose(const JsonNode& node, std::initializer_list<const char*> keys)
{
    std::string found;
    for (const char* key : keys) {
        if (!node.has(key)) continue;
        if (!found.empty()) node.fail("ambiguous: both \"" + found + "\" and \"" + key + "\" given");
        found = key;
    }
    if (found.empty()) {
        std::string list;
        for (const char* key : keys) list += std::string(list.empty() ? "" : ", ") + key;
        node.fail("expected one of: " + list);
    }
    return found;
}

std::vector<SuperOp> parse_generators(const JsonNode& node)
{
    std::vector<SuperOp> out;
    for (std::size_t j = 0; j < node.size(); ++j) out.push_back(parse_superop(node.at(j)));
    if (out.empty()) node.fail("at least one generator is required");
    for (std::size_t j = 1; j < out.size(); ++j)
        if (out[j].dim() != out[0].dim()) node.at(j).fail("generator dimension differs from the first generator");
    return out;
}

} // namespace

ConfigError::ConfigError(const std::string& pointer, const std::string& message)
    : InvalidInput((pointer.empty() ? std::string("/") : pointer) + ": " + message), pointer_(pointer)
{
}

JsonNode::JsonNode(const Json& value, std::string pointer) : value_(&value), pointer_(std::move(pointer)) {}

void JsonNode::fail(const std::string& message) const { throw ConfigError(pointer_, message); }

bool JsonNode::has(const std::string& key) const
{
    return value_->is_object() && value_->contains(key) && !(*value_)[key].is_null();
}

JsonNode JsonNode::at(const std::string& key) const
{
    if (!value_->is_object()) fail("expected an object, got " + type_name(*value_));
    if (!has(key)) fail("missing required field \"" + key + "\"");
    return JsonNode((*value_)[key], pointer_ + "/" + escape_pointer(key));
}

std::optional<JsonNode> JsonNode::find(const std::string& key) const
{
    if (!has(key)) return std::nullopt;
    return at(key);
}

JsonNode JsonNode::at(std::size_t index) const
{
    if (!value_->is_array()) fail("expected an array, got " + type_name(*value_));
    if (index >= value_->size()) fail("index " + std::to_string(index) + " out of range");
    return JsonNode((*value_)[index], pointer_ + "/" + std::to_string(index));
}

std::size_t JsonNode::size() const
{
    if (!value_->is_array()) fail("expected an array, got " + type_name(*value_));
    return value_->size();
}

double JsonNode::number() const
{
    if (!value_->is_number()) fail("expected a number, got " + type_name(*value_));
    const double v = value_->get<double>();
    if (!std::isfinite(v)) fail("number is not finite");
    return v;
}

double JsonNode::positive() const
{
    const double v = number();
    if (!(v > 0.0)) fail("expected a positive number, got " + std::to_string(v));
    return v;
}

int JsonNode::integer() const
{
    if (!value_->is_number_integer()) fail("expected an integer, got " + type_name(*value_));
    return value_->get<int>();
}

std::string JsonNode::string() const
{
    if (!value_->is_string()) fail("expected a string, got " + type_name(*value_));
    return value_->get<std::string>();
}

bool JsonNode::boolean() const
{
    if (!value_->is_boolean()) fail("expected a boolean, got " + type_name(*value_));
    return value_->get<bool>();
}

std::vector<double> JsonNode::numbers() const
{
    std::vector<double> out;
    for (std::size_t k = 0; k < size(); ++k) out.push_back(at(k).number());
    return out;
}

Operator parse_operator(const JsonNode& node)
{
    auto rows_of = [](const JsonNode& rows) {
        const std::size_t n = rows.size();
        if (n == 0) rows.fail("operator has no rows");
        Eigen::MatrixXd m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const JsonNode row = rows.at(i);
            if (row.size() != n) row.fail("operator must be square: expected " + std::to_string(n) + " entries");
            for (std::size_t j = 0; j < n; ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.at(j).number();
        }
        return m;
    };

    if (node.value().is_array()) return rows_of(node).cast<Complex>();
    const Eigen::MatrixXd re = rows_of(node.at("re"));
    Operator op = re.cast<Complex>();
    if (const auto im = node.find("im")) {
        const Eigen::MatrixXd imag = rows_of(*im);
        if (imag.rows() != re.rows()) im->fail("\"im\" and \"re\" have different sizes");
        op += Complex(0.0, 1.0) * imag.cast<Complex>();
    }
    return op;
}

Json operator_to_json(const Operator& op)
{
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < op.rows(); ++i) {
        Json r = Json::array(), m = Json::array();
        for (Eigen::Index j = 0; j < op.cols(); ++j) {
            r.push_back(op(i, j).real());
            m.push_back(op(i, j).imag());
        }
        re.push_back(std::move(r));
        im.push_back(std::move(m));
    }
    return {{"re", std::move(re)}, {"im", std::move(im)}};
}

GkslSpec parse_gksl(const JsonNode& node)
{
    GkslSpec spec;
    spec.hamiltonian = parse_operator(node.at("hamiltonian"));
    if (const auto jumps = node.find("jumps")) {
        for (std::size_t k = 0; k < jumps->size(); ++k) {
            const JsonNode jump = jumps->at(k);
            Operator op = parse_operator(jump.at("op"));
            if (op.rows() != spec.hamiltonian.rows()) jump.at("op").fail("jump dimension differs from the Hamiltonian");
            const double rate = jump.at("rate").number();
            if (rate < 0.0) jump.at("rate").fail("rate must be non-negative");
            spec.jumps.push_back({std::move(op), rate});
        }
    }
    return spec;
}

SuperOp parse_superop(const JsonNode& node)
{
    if (!node.value().is_object()) node.fail("expected a superoperator object, got " + type_name(node.value()));
    const std::string kind =
        choose(node, {"matrix", "gksl", "conjugation", "kraus", "identity", "zero", "transpose"});
    const JsonNode body = node.at(kind);
    try {
        if (kind == "matrix") return scaled(node, SuperOp(parse_operator(body)));
        if (kind == "gksl") {
            Picture picture = Picture::heisenberg;
            if (const auto p = body.find("picture")) {
                const std::string name = p->string();
                if (name == "schroedinger") picture = Picture::schroedinger;
                else if (name != "heisenberg") p->fail("picture must be \"heisenberg\" or \"schroedinger\"");
            }
            return scaled(node, gksl_generator(parse_gksl(body), picture));
        }
        if (kind == "conjugation") return scaled(node, conjugation(parse_operator(body)));
        if (kind == "kraus") {
            std::vector<Operator> ops;
            for (std::size_t k = 0; k < body.size(); ++k) ops.push_back(parse_operator(body.at(k)));
            if (ops.empty()) body.fail("at least one Kraus operator is required");
            SuperOp out = SuperOp::zero(static_cast<int>(ops.front().rows()));
            for (std::size_t k = 0; k < ops.size(); ++k) {
                if (ops[k].rows() != ops.front().rows()) body.at(k).fail("Kraus operators differ in dimension");
                out += sandwich(ops[k].adjoint(), ops[k]);
            }
            return scaled(node, out);
        }
        const int d = body.integer();
        if (d < 1) body.fail("dimension must be positive");
        if (kind == "identity") return scaled(node, SuperOp::identity(d));
        if (kind == "zero") return SuperOp::zero(d);
        return scaled(node, transpose_map(d));
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        body.fail(e.what());
    }
}

Json superop_to_json(const SuperOp& op) { return {{"matrix", operator_to_json(op.matrix())}}; }

MemoryFunction parse_memory_function(const JsonNode& node)
{
    const std::string kind = node.at("kind").string();
    if (kind == "zero") return MemoryFunction::zero();
    if (kind == "erlang") {
        const double gamma = node.at("gamma").positive();
        const int order = node.at("order").integer();
        if (order < 1) node.at("order").fail("order must be at least 1");
        double scale = 1.0;
        if (const auto s = node.find("scale")) scale = s->number();
        return MemoryFunction::erlang(gamma, order, scale);
    }
    if (kind == "samples") {
        const double h = node.at("h").positive();
        std::vector<double> values = node.at("values").numbers();
        if (values.empty()) node.at("values").fail("at least one sample is required");
        return MemoryFunction::samples(h, std::move(values));
    }
    node.at("kind").fail("unknown memory function kind \"" + kind + "\" (expected erlang, samples or zero)");
}

Json memory_function_to_json(const MemoryFunction& f)
{
    if (const auto* e = std::get_if<Erlang>(&f.kind()))
        return {{"kind", "erlang"}, {"gamma", e->gamma}, {"order", e->order}, {"scale", e->scale}};
    if (const auto* s = std::get_if<Samples>(&f.kind()))
        return {{"kind", "samples"}, {"h", s->step}, {"values", s->values}};
    return {{"kind", "zero"}};
}

SuperOpSeries parse_series(const JsonNode& node, const TimeGrid& grid)
{
    SuperOpSeries out;
    out.grid = grid;
    if (node.has("f")) {
        const MemoryFunction f = parse_memory_function(node.at("f"));
        const SuperOp times = parse_superop(node.at("times"));
        Eigen::VectorXd samples;
        try {
            samples = f.sample(grid);
        } catch (const InvalidInput& e) {
            node.at("f").fail(e.what());
        }
        for (Eigen::Index k = 0; k < samples.size(); ++k) out.values.push_back(samples[k] * times);
        return out;
    }
    const double h = node.at("h").positive();
    if (std::abs(h - grid.step) > 1e-12 * grid.step)
        node.at("h").fail("series step " + std::to_string(h) + " differs from the grid step " + std::to_string(grid.step));
    const JsonNode values = node.at("values");
    if (values.size() < grid.count)
        values.fail("series has " + std::to_string(values.size()) + " samples, the grid needs " +
                    std::to_string(grid.count));
    for (std::size_t k = 0; k < values.size(); ++k) out.values.push_back(parse_superop(values.at(k)));
    for (std::size_t k = 1; k < out.values.size(); ++k)
        if (out.values[k].dim() != out.values[0].dim()) values.at(k).fail("dimension differs from the first sample");
    out.grid = TimeGrid(grid.step, out.values.size());
    return out;
}

KernelSpec parse_kernel(const JsonNode& node, const TimeGrid& grid, std::optional<double> tol)
{
    std::optional<SuperOp> local;
    if (const auto l = node.find("local")) local = parse_superop(*l);

    KernelSpec spec;
    const JsonNode memory = node.at("memory");
    const std::string type = memory.at("type").string();
    try {
        if (type == "none") {
            if (local) spec.dim = local->dim();
            else if (const auto d = node.find("dim")) spec.dim = d->integer();
            else node.fail("a kernel without memory needs a \"local\" part or a \"dim\"");
            if (spec.dim < 1) node.fail("dimension must be positive");
        } else if (type == "scalar_cp") {
            const SuperOp channel = parse_superop(memory.at("B"));
            ScalarKernel kappa;
            if (memory.has("f")) {
                kappa = kappa_from_f(parse_memory_function(memory.at("f")), grid).kernel;
            } else {
                const JsonNode k = memory.at("kappa");
                const double h = k.at("h").positive();
                if (std::abs(h - grid.step) > 1e-12 * grid.step) k.at("h").fail("kappa step differs from the grid step");
                const std::vector<double> v = k.at("values").numbers();
                if (v.size() < grid.count) k.at("values").fail("kappa does not cover the grid");
                kappa.regular = {TimeGrid(h, v.size()), Eigen::Map<const Eigen::VectorXd>(v.data(), v.size())};
                if (const auto w = memory.find("local_weight")) kappa.local_weight = w->number();
            }
            spec = scalar_cp_kernel_unchecked(kappa, channel);
        } else if (type == "split") {
            SplitMemory split;
            split.positive = parse_series(memory.at("positive"), grid);
            split.normalizer = parse_series(memory.at("normalizer"), grid);
            if (const auto b = memory.find("positive_local")) split.positive_local = parse_superop(*b);
            if (const auto z = memory.find("normalizer_local")) split.normalizer_local = parse_superop(*z);
            spec.dim = split.positive[0].dim();
            if (split.positive_local || split.normalizer_local) {
                SuperOp dirac = SuperOp::zero(spec.dim);
                if (split.positive_local) dirac += *split.positive_local;
                if (split.normalizer_local) dirac -= *split.normalizer_local;
                spec.local = dirac;
            }
            spec.memory = std::move(split);
        } else if (type == "sampled") {
            SampledMemory sampled{parse_series(memory.at("values"), grid)};
            spec.dim = sampled.values[0].dim();
            spec.memory = std::move(sampled);
        } else if (type == "mixture_n2") {
            const std::vector<double> x = memory.at("weights").numbers();
            if (x.size() != 2) memory.at("weights").fail("expected two weights");
            const std::vector<SuperOp> gens = parse_generators(memory.at("generators"));
            if (gens.size() != 2) memory.at("generators").fail("expected two generators");
            spec = mixture_kernel_n2(x[0], x[1], gens[0], gens[1], grid);
        } else if (type == "generalized") {
            const SuperOpSeries F = parse_series(memory.at("F"), grid);
            spec = generalized_generator(z_from_F(F, tol), parse_superop(memory.at("B")), tol);
        } else {
            memory.at("type").fail("unknown memory type \"" + type +
                                   "\" (expected none, scalar_cp, split, sampled, mixture_n2 or generalized)");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        memory.fail(e.what());
    }

    if (local) {
        if (local->dim() != spec.dim) node.at("local").fail("local part dimension differs from the memory part");
        if (type != "none") spec.local = spec.local ? SuperOp(*spec.local + *local) : *local;
        else spec.local = local;
    }
    try {
        spec.validate();
    } catch (const InvalidInput& e) {
        node.fail(e.what());
    }
    return spec;
}

MixtureSpec parse_mixture(const JsonNode& node)
{
    MixtureSpec spec{node.at("weights").numbers(), parse_generators(node.at("generators"))};
    try {
        spec.validate();
    } catch (const InvalidInput& e) {
        node.fail(e.what());
    }
    return spec;
}

TimeMixtureSpec parse_time_mixture(const JsonNode& node)
{
    TimeMixtureSpec spec;
    const JsonNode weights = node.at("weights");
    for (std::size_t j = 0; j < weights.size(); ++j) spec.weights.push_back(parse_memory_function(weights.at(j)));
    spec.generators = parse_generators(node.at("generators"));
    if (spec.weights.size() != spec.generators.size()) node.fail("time mixture needs one weight function per generator");
    return spec;
}

DilationSpec parse_dilation(const JsonNode& node)
{
    DilationSpec spec;
    spec.system_dim = node.at("system_dim").integer();
    spec.env_dim = node.at("env_dim").integer();
    spec.total = parse_gksl(node.at("total"));
    if (const auto omega = node.find("omega")) spec.omega = parse_operator(*omega);
    else if (spec.env_dim >= 1) spec.omega = ground_state(spec.env_dim);
    try {
        spec.validate();
    } catch (const InvalidInput& e) {
        node.fail(e.what());
    }
    return spec;
}

} // namespace memkernel
