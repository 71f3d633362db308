#include "memkernel/scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "memkernel/families.hpp"
#include "memkernel/kernels.hpp"
#include "memkernel/memory.hpp"

namespace memkernel {

namespace fs = std::filesystem;

namespace {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level log_level()
{
    const char* env = std::getenv("MEMKERNEL_LOG");
    if (env == nullptr) return Level::warn;
    const std::string v(env);
    if (v == "quiet" || v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

Json verdict(bool ok) { return ok ? "pass" : "fail"; }

class Scenario {
public:
    Scenario(std::string kind, const Json& config, const ScenarioOverrides& overrides, std::ostream& log)
        : kind_(std::move(kind)), config_(config), root_(config_), log_(log), level_(log_level())
    {
        if (!config_.is_object()) root_.fail("config must be a JSON object");
        if (const auto k = root_.find("kind"); k && k->string() != kind_)
            k->fail("config is for scenario \"" + k->string() + "\", not \"" + kind_ + "\"");
        if (overrides.step) config_["grid"]["h"] = *overrides.step;
        if (overrides.horizon) config_["grid"]["T"] = *overrides.horizon;
        if (overrides.tolerance) config_["tolerance"] = *overrides.tolerance;
        config_["kind"] = kind_;
        root_ = JsonNode(config_);

        if (kind_ != "kernel-from-f" || root_.has("grid")) {
            const JsonNode grid = root_.at("grid");
            const double h = grid.at("h").positive();
            const double horizon = grid.at("T").number();
            if (horizon < h) grid.at("T").fail("horizon T must be at least the step h");
            grid_ = TimeGrid::covering(h, horizon);
        }
        if (const auto t = root_.find("tolerance")) tolerance_ = t->positive();
    }

    int run()
    {
        info("running " + kind_ + " on " + std::to_string(grid_.count) + " grid points, h = " +
             format_number(grid_.step));
        if (kind_ == "evolve") evolve_scenario();
        else if (kind_ == "certify") certify_scenario();
        else if (kind_ == "kernel-from-f") kernel_from_f_scenario();
        else if (kind_ == "mixture") mixture_scenario();
        else if (kind_ == "time-mixture") time_mixture_scenario();
        else if (kind_ == "dilate") dilate_scenario();
        else if (kind_ == "laplace-check") laplace_check_scenario();
        else throw InvalidInput("unknown scenario \"" + kind_ + "\"");

        bool ok = true;
        for (const auto& [name, value] : verdicts_.items()) {
            ok = ok && value == "pass";
            if (value != "pass") warn("verdict " + name + ": fail");
        }
        report_["scenario"] = kind_;
        report_["config"] = config_;
        report_["tolerances"] = tolerances_;
        report_["verdicts"] = verdicts_;
        report_["metrics"] = metrics_;
        report_["warnings"] = warnings_;
        report_["status"] = ok ? "pass" : "fail";
        files_.emplace_back("report.json", report_.dump(2) + "\n");
        return ok ? exit_ok : exit_verdict_failed;
    }

    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

private:
    double tolerance(int dim) const { return tolerance_.value_or(default_tolerance(dim)); }

    double option(const std::string& key, double fallback)
    {
        const double v = root_.find(key) ? root_.at(key).positive() : fallback;
        tolerances_[key] = v;
        return v;
    }

    std::vector<double> laplace_points()
    {
        const auto p = root_.find("p");
        if (!p) return {};
        std::vector<double> out;
        for (std::size_t k = 0; k < p->size(); ++k) out.push_back(p->at(k).positive());
        return out;
    }

    void add_warnings(const std::vector<std::string>& ws)
    {
        for (const auto& w : ws) {
            warnings_.push_back(w);
            warn(w);
        }
    }

    void warn(const std::string& m) const
    {
        if (level_ >= Level::warn) log_ << "memkernel: warning: " << m << '\n';
    }
    void info(const std::string& m) const
    {
        if (level_ >= Level::info) log_ << "memkernel: " << m << '\n';
    }

    // CP and unitality verdicts for a trace, plus the CSV and optional dumps.
    void certify_trace(const EvolutionTrace& trace, int dim, double scale = 1.0)
    {
        const double cp_tol = scale * tolerance(dim);
        const double unital_tol = option("unitality_tolerance", 10.0 * cp_tol);
        tolerances_["cp_tolerance"] = cp_tol;
        metrics_["min_cp_defect"] = trace.min_cp_defect();
        metrics_["max_unitality_defect"] = trace.max_unitality_defect();
        metrics_["max_choi_herm_residual"] = trace.max_herm_residual();
        verdicts_["cp_certified"] = verdict(trace.min_cp_defect() >= -cp_tol);
        verdicts_["unital"] = verdict(trace.max_unitality_defect() <= unital_tol);
        add_warnings(trace.warnings);
        files_.emplace_back("trace.csv", trace_csv(trace));
        dump(trace);
    }

    void dump(const EvolutionTrace& trace)
    {
        const auto d = root_.find("dump");
        if (!d) return;
        const JsonNode stride_node = d->at("stride");
        const int stride = stride_node.integer();
        if (stride < 1) stride_node.fail("stride must be at least 1");
        for (std::size_t k = 0; k < trace.values.size(); k += static_cast<std::size_t>(stride)) {
            char name[32];
            std::snprintf(name, sizeof name, "superops/A_%06zu.json", k);
            Json j = superop_to_json(trace.values[k]);
            j["t"] = trace.grid.time(k);
            j["index"] = k;
            files_.emplace_back(name, j.dump(2) + "\n");
        }
    }

    KernelSpec kernel() { return parse_kernel(root_.at("kernel"), grid_, tolerance_); }

    void evolve_scenario()
    {
        const KernelSpec spec = kernel();
        const IdentityAnnihilation ann = identity_annihilation(spec);
        metrics_["local_identity_defect"] = ann.local;
        metrics_["memory_identity_defect"] = ann.memory;
        certify_trace(evolve(spec, grid_), spec.dim);
    }

    void certify_scenario()
    {
        const KernelSpec spec = kernel();
        const double tol = tolerance(spec.dim);
        const Theorem1Report t1 = theorem1_check(spec, grid_, tol);
        verdicts_["theorem1"] = verdict(t1.pass());
        metrics_["theorem1"] = {{"min_positive_cp_defect", t1.min_positive_cp_defect},
                                {"max_positive_herm_residual", t1.max_positive_herm_residual},
                                {"local_identity_defect", t1.annihilation.local},
                                {"memory_identity_defect", t1.annihilation.memory},
                                {"min_normalization_cp_defect", t1.min_normalization_cp_defect},
                                {"failures", t1.failures}};

        const SplitView view = split_view(spec, grid_);
        const NormalizationSolution n = solve_normalization(view.normalizer, grid_, view.normalizer_local);
        const BreuerVacchiniReport bv = breuer_vacchini_check(n, view.positive, view.positive_local, tol);
        verdicts_["breuer_vacchini"] = verdict(bv.pass());
        metrics_["breuer_vacchini"] = {{"min_cp_defect", bv.min_cp_defect},
                                       {"worst_time", grid_.time(bv.worst_index)}};
        certify_trace(evolve(spec, grid_), spec.dim);
    }

    void kernel_from_f_scenario()
    {
        const JsonNode f_node = root_.at("f");
        const MemoryFunction f = parse_memory_function(f_node);
        if (grid_.count == 0) {
            const auto* s = std::get_if<Samples>(&f.kind());
            if (s == nullptr) root_.fail("missing required field \"grid\"");
            grid_ = TimeGrid(s->step, s->values.size());
        }
        const double adm_tol = option("admissibility_tolerance", 1e-8);
        const AdmissibilityReport adm = check_admissible(f, grid_.horizon(), adm_tol, grid_.step);
        verdicts_["admissible"] = verdict(adm.pass());
        metrics_["admissibility"] = {{"min_value", adm.min_value},
                                     {"integral_to_horizon", adm.integral_to_horizon},
                                     {"integral_total", adm.integral_total},
                                     {"nonnegative", adm.nonnegative},
                                     {"normalized", adm.normalized}};

        const KappaResult r = kappa_from_f(f, grid_);
        metrics_["local_weight"] = r.kernel.local_weight;
        metrics_["first_kind_residual"] = r.first_kind_residual;
        add_warnings(r.warnings);

        std::string csv = "t,kappa\n";
        for (std::size_t k = 0; k < grid_.count; ++k)
            csv += format_number(grid_.time(k)) + "," +
                   format_number(r.kernel.regular.values[static_cast<Eigen::Index>(k)]) + "\n";
        files_.emplace_back("kappa.csv", std::move(csv));
    }

    void mixture_scenario()
    {
        const JsonNode node = root_.at("mixture");
        const MixtureSpec spec = parse_mixture(node);
        const int n = static_cast<int>(spec.generators.size());
        const EvolutionTrace trace = mixture_evolution(spec, grid_);
        certify_trace(trace, spec.dim(), n);

        const std::vector<double> ps = laplace_points();
        if (!ps.empty()) {
            if (n != 2 && n != 3) root_.at("p").fail("closed-form kernels exist only for two or three generators");
            const double tol = option("laplace_tolerance", 1e-4);
            const auto numeric = kernel_from_G(extract_G(trace), ps);
            Json rows = Json::array();
            bool ok = true;
            for (const auto& r : numeric) {
                SuperOp closed;
                try {
                    closed = n == 2 ? mixture_kernel_n2_hat(spec.weights[0], spec.weights[1], spec.generators[0],
                                                            spec.generators[1], r.p)
                                    : mixture_kernel_n3_hat(spec.weights, spec.generators[0], spec.generators[1],
                                                            spec.generators[2], r.p);
                } catch (const ConfigError&) {
                    throw;
                } catch (const InvalidInput& e) {
                    node.at("generators").fail(e.what());
                }
                const double diff = norm(r.kernel - closed);
                ok = ok && diff <= tol;
                rows.push_back({{"p", r.p}, {"closed_form_difference", diff}, {"tail_bound", r.tail_bound},
                                {"resolvent_residual", r.resolvent_residual}});
            }
            metrics_["laplace"] = rows;
            verdicts_["laplace_closed_form"] = verdict(ok);
        }
        if (const auto c = root_.find("compare_kernel_evolution"); c && c->boolean()) {
            if (n != 2) c->fail("kernel evolution comparison needs exactly two generators");
            const KernelSpec k = mixture_kernel_n2(spec.weights[0], spec.weights[1], spec.generators[0],
                                                   spec.generators[1], grid_);
            const EvolutionTrace evolved = evolve(k, grid_);
            double worst = 0.0;
            for (std::size_t i = 0; i < grid_.count; ++i)
                worst = std::max(worst, norm(evolved.values[i] - trace.values[i]));
            metrics_["kernel_evolution_distance"] = worst;
            verdicts_["kernel_evolution"] = verdict(worst <= option("kernel_evolution_tolerance", 1e-5));
        }
    }

    void time_mixture_scenario()
    {
        const TimeMixtureSpec spec = parse_time_mixture(root_.at("time_mixture"));
        const TimeMixtureResult r = [&] {
            try {
                return time_mixture_evolution(spec, grid_, tolerance_);
            } catch (const InvalidInput& e) {
                root_.at("time_mixture").fail(e.what());
            }
        }();
        certify_trace(r.trace, spec.dim());
        const GRepresentation rep = extract_G(r.trace);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid_.count; ++k) worst = std::max(worst, norm(rep.G[k] - r.G[k]));
        metrics_["g_formula_distance"] = worst;
        metrics_["reconstruction_residual"] = rep.reconstruction_residual;
    }

    void dilate_scenario()
    {
        const DilationSpec spec = parse_dilation(root_.at("dilation"));
        const EvolutionTrace trace = dilation_reduced(spec, grid_);
        certify_trace(trace, spec.system_dim);
        const GRepresentation rep = extract_G(trace);
        metrics_["max_g_identity_defect"] = rep.max_identity_defect;
        verdicts_["g_annihilates_identity"] = verdict(rep.max_identity_defect <= option("g_identity_tolerance", 1e-6));
        resolvent_checks(rep);
    }

    void laplace_check_scenario()
    {
        const KernelSpec spec = kernel();
        const std::vector<double> ps = laplace_points();
        if (ps.empty()) root_.fail("missing required field \"p\"");
        const EvolutionTrace trace = evolve(spec, grid_);
        certify_trace(trace, spec.dim);
        const GRepresentation rep = extract_G(trace);
        const auto numeric = resolvent_checks(rep);

        const double tol = option("laplace_tolerance", 1e-4);
        bool ok = true;
        Json rows = Json::array();
        for (const auto& r : numeric) {
            const LaplaceSample exact = kernel_laplace(spec, r.p);
            const double diff = norm(r.kernel - exact.value);
            ok = ok && diff <= tol;
            rows.push_back({{"p", r.p}, {"kernel_difference", diff}, {"kernel_tail_bound", exact.tail_bound}});
        }
        metrics_["kernel_laplace"] = rows;
        verdicts_["kernel_laplace"] = verdict(ok);
    }

    std::vector<KernelLaplace> resolvent_checks(const GRepresentation& rep)
    {
        const std::vector<double> ps = laplace_points();
        if (ps.empty()) return {};
        const double tol = option("resolvent_tolerance", 1e-3);
        const double tail_tol = option("tail_tolerance", 1e-6);
        const auto numeric = kernel_from_G(rep, ps);
        Json rows = Json::array();
        bool resolvent_ok = true, tail_ok = true;
        for (const auto& r : numeric) {
            resolvent_ok = resolvent_ok && r.resolvent_residual <= tol;
            tail_ok = tail_ok && r.tail_bound <= tail_tol;
            rows.push_back({{"p", r.p}, {"resolvent_residual", r.resolvent_residual}, {"tail_bound", r.tail_bound}});
        }
        metrics_["resolvent"] = rows;
        verdicts_["resolvent"] = verdict(resolvent_ok);
        verdicts_["tail"] = verdict(tail_ok);
        return numeric;
    }

    std::string kind_;
    Json config_;
    JsonNode root_;
    std::ostream& log_;
    Level level_;
    TimeGrid grid_;
    std::optional<double> tolerance_;

    Json report_ = Json::object();
    Json tolerances_ = Json::object();
    Json verdicts_ = Json::object();
    Json metrics_ = Json::object();
    Json warnings_ = Json::array();
    std::vector<std::pair<std::string, std::string>> files_;
};

} // namespace

const std::vector<std::string>& scenario_kinds()
{
    static const std::vector<std::string> kinds{"evolve",       "certify", "kernel-from-f", "mixture",
                                                "time-mixture", "dilate",  "laplace-check"};
    return kinds;
}

Json load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", "config " + path.string() + " is not valid JSON: " + e.what());
    }
}

std::string trace_csv(const EvolutionTrace& trace)
{
    std::string out = "t,cp_defect,unitality_defect,choi_herm_residual\n";
    for (std::size_t k = 0; k < trace.diagnostics.size(); ++k) {
        const StepDiagnostics& d = trace.diagnostics[k];
        out += format_number(trace.grid.time(k)) + "," + format_number(d.cp_defect) + "," +
               format_number(d.unitality_defect) + "," + format_number(d.choi_herm_residual) + "\n";
    }
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& content)
{
    require(!path.empty(), "output path is empty");
    require(path.has_filename(), "output path " + path.string() + " names a directory");
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.close();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw std::runtime_error("write failed for " + path.string());
        }
    }
    fs::rename(tmp, path);
}

void emit_csv(const EvolutionTrace& trace, const fs::path& path) { write_file_atomic(path, trace_csv(trace)); }

int run_scenario(const std::string& kind, const Json& config, const fs::path& outdir,
                 const ScenarioOverrides& overrides, std::ostream& log)
{
    try {
        require(!outdir.empty(), "output directory is empty");
        Scenario scenario(kind, config, overrides, log);
        const int code = scenario.run();
        for (const auto& [name, content] : scenario.files()) {
            const fs::path target = outdir / name;
            fs::create_directories(target.parent_path());
            write_file_atomic(target, content);
        }
        return code;
    } catch (const NumericalError& e) {
        log << "memkernel: numerical error: " << e.what() << '\n';
    } catch (const InvalidInput& e) {
        log << "memkernel: invalid input: " << e.what() << '\n';
    } catch (const std::exception& e) {
        log << "memkernel: error: " << e.what() << '\n';
    }
    return exit_error;
}

} // namespace memkernel
