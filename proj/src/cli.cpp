#include "sparsegen/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "sparsegen/errors.hpp"
#include "sparsegen/innovation.hpp"
#include "sparsegen/synthesis.hpp"

namespace sparsegen::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& doc, const std::string& where, std::initializer_list<const char*> known) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
    }
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path + " must be finite");
    return x;
}

std::int64_t as_int(const json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    const double x = as_number(v, path);
    if (x != std::floor(x) || std::abs(x) > 9.0e18) throw ConfigError(path + " must be an integer");
    return static_cast<std::int64_t>(x);
}

std::size_t as_count(const json& v, const std::string& path) {
    const auto x = as_int(v, path);
    if (x < 1) throw ConfigError(path + " must be >= 1");
    return static_cast<std::size_t>(x);
}

std::uint64_t as_seed(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const auto x = as_int(v, path);
    if (x < 0) throw ConfigError(path + " must be a non-negative integer");
    return static_cast<std::uint64_t>(x);
}

template <class T, class F>
std::vector<T> as_list(const json& v, const std::string& path, F convert) {
    if (!v.is_array()) throw ConfigError(path + " must be an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

StepFunction step_function(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path + " must be a nonempty array of steps");
    StepFunction phi;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        const json& s = v[i];
        StepKernel k;
        if (s.is_array()) {
            if (s.size() != 2 && s.size() != 3) throw ConfigError(at + " must be [a, b] or [a, b, height]");
            k.a = as_number(s[0], at + "[0]");
            k.b = as_number(s[1], at + "[1]");
            if (s.size() == 3) k.height = as_number(s[2], at + "[2]");
        } else if (s.is_object()) {
            reject_unknown(s, at, {"a", "b", "height"});
            if (!s.contains("a") || !s.contains("b")) throw ConfigError(at + " needs 'a' and 'b'");
            k.a = as_number(s["a"], at + ".a");
            k.b = as_number(s["b"], at + ".b");
            if (s.contains("height")) k.height = as_number(s["height"], at + ".height");
        } else {
            throw ConfigError(at + " must be an array or an object");
        }
        if (!(k.a >= 0.0 && k.a < k.b)) throw ConfigError(at + " needs 0 <= a < b");
        phi.push_back(k);
    }
    return phi;
}

ValidateConfig validate_config(const json& v) {
    if (!v.is_object()) throw ConfigError("validate must be an object");
    reject_unknown(v, "validate", {"tune", "threshold", "n_schedule", "n_jumps", "samples", "repetitions",
                                   "second_order", "fractional_moment"});
    ValidateConfig c;
    if (v.contains("tune")) {
        if (!v["tune"].is_boolean()) throw ConfigError("validate.tune must be true or false");
        c.tune = v["tune"].get<bool>();
    }
    if (v.contains("threshold")) c.threshold = as_number(v["threshold"], "validate.threshold");
    if (!(c.threshold > 0.0 && c.threshold <= 1.0)) throw ConfigError("validate.threshold must be in (0, 1]");
    if (v.contains("n_schedule")) c.n_schedule = as_list<std::int64_t>(v["n_schedule"], "validate.n_schedule", as_int);
    if (v.contains("n_jumps")) c.n_jumps = as_list<double>(v["n_jumps"], "validate.n_jumps", as_number);
    for (auto n : c.n_schedule) {
        if (n < 1) throw ConfigError("validate.n_schedule entries must be >= 1");
    }
    for (auto nj : c.n_jumps) {
        if (!(nj > 0.0)) throw ConfigError("validate.n_jumps entries must be > 0");
    }
    if (!c.n_schedule.empty() && !c.n_jumps.empty()) {
        throw ConfigError("validate: give n_schedule or n_jumps, not both");
    }
    if (v.contains("samples")) c.samples = as_count(v["samples"], "validate.samples");
    if (v.contains("repetitions")) c.repetitions = static_cast<int>(as_count(v["repetitions"], "validate.repetitions"));
    if (v.contains("second_order")) {
        const json& s = v["second_order"];
        if (!s.is_object()) throw ConfigError("validate.second_order must be an object");
        reject_unknown(s, "validate.second_order", {"phi1", "phi2", "trials"});
        if (!s.contains("phi1") || !s.contains("phi2")) {
            throw ConfigError("validate.second_order needs phi1 and phi2");
        }
        SecondOrderConfig so;
        so.phi1 = step_function(s["phi1"], "validate.second_order.phi1");
        so.phi2 = step_function(s["phi2"], "validate.second_order.phi2");
        if (s.contains("trials")) so.trials = as_count(s["trials"], "validate.second_order.trials");
        c.second_order = so;
    }
    if (v.contains("fractional_moment")) {
        const json& f = v["fractional_moment"];
        const std::string at = "validate.fractional_moment";
        if (!f.is_object()) throw ConfigError(at + " must be an object");
        reject_unknown(f, at, {"p", "window", "T", "h", "trials", "n_schedule"});
        FractionalMomentConfig fm;
        if (f.contains("p")) fm.p = as_number(f["p"], at + ".p");
        if (!(fm.p > 0.0 && fm.p < 1.0)) throw ConfigError(at + ".p must be in (0, 1)");
        if (f.contains("window")) fm.window = as_number(f["window"], at + ".window");
        if (!(fm.window > 0.0)) throw ConfigError(at + ".window must be > 0");
        if (f.contains("T")) fm.T = as_number(f["T"], at + ".T");
        if (f.contains("h")) fm.h = as_number(f["h"], at + ".h");
        if (fm.T < 0.0 || fm.h < 0.0) throw ConfigError(at + ": T and h must be >= 0 (0 selects the default)");
        if (f.contains("trials")) fm.trials = as_count(f["trials"], at + ".trials");
        if (f.contains("n_schedule")) fm.n_schedule = as_list<std::int64_t>(f["n_schedule"], at + ".n_schedule", as_int);
        for (auto n : fm.n_schedule) {
            if (n < 1) throw ConfigError(at + ".n_schedule entries must be >= 1");
        }
        c.fractional_moment = fm;
    }
    return c;
}

BenchConfig bench_config(const json& v) {
    if (!v.is_object()) throw ConfigError("bench must be an object");
    reject_unknown(v, "bench", {"n_sweep", "grid_sweep", "fixed_n", "repetitions"});
    BenchConfig c;
    if (v.contains("n_sweep")) c.n_sweep = as_list<std::int64_t>(v["n_sweep"], "bench.n_sweep", as_int);
    if (v.contains("grid_sweep")) c.grid_sweep = as_list<std::size_t>(v["grid_sweep"], "bench.grid_sweep", as_count);
    if (v.contains("fixed_n")) c.fixed_n = as_int(v["fixed_n"], "bench.fixed_n");
    if (v.contains("repetitions")) c.repetitions = static_cast<int>(as_count(v["repetitions"], "bench.repetitions"));
    for (auto n : c.n_sweep) {
        if (n < 1) throw ConfigError("bench.n_sweep entries must be >= 1");
    }
    if (c.fixed_n < 1) throw ConfigError("bench.fixed_n must be >= 1");
    if (c.repetitions < 5) throw ConfigError("bench.repetitions must be >= 5");
    return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw ConfigError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::vector<std::string> warnings_of(const Trajectory& t) {
    std::vector<std::string> out;
    if (t.provenance.contains("warnings")) {
        for (const auto& w : t.provenance["warnings"]) out.push_back(w.get<std::string>());
    }
    return out;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_number(const json& doc, const char* key) {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    return as_number(doc[key], std::string{"report entry."} + key);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// True for L = D.
bool is_plain_derivative(const RationalOperator& op) {
    return op.order() == 1 && op.q_coeffs() == std::vector<double>{1.0} && op.lead() == 1.0 &&
           op.roots().front().value == cplx{0.0, 0.0};
}

// E|<rect[0, w], s>|^p for L = D when a closed form is available.
std::optional<double> fractional_target(const LevyLaw& law, const RationalOperator& op, double window, double p) {
    if (!is_plain_derivative(op)) return std::nullopt;
    if (const auto* g = std::get_if<Gaussian>(&law.family()); g && g->mu == 0.0) {
        return gaussian_abs_moment(g->sigma * std::sqrt(window * window * window / 3.0), p);
    }
    if (const auto* s = std::get_if<Stable>(&law.family()); s && s->beta == 0.0 && s->mu == 0.0 && p < s->alpha) {
        const double scale = s->c * std::pow(std::pow(window, s->alpha + 1) / (s->alpha + 1), 1.0 / s->alpha);
        return stable_abs_moment(s->alpha, scale, p);
    }
    return std::nullopt;
}

ReportEntry checked_entry(std::string metric, double value, double target, double tolerance, std::string detail) {
    ReportEntry e;
    e.metric = std::move(metric);
    e.value = value;
    e.target = target;
    e.tolerance = tolerance;
    e.pass = std::abs(value - target) <= tolerance;
    e.status = *e.pass ? "pass" : "fail";
    e.detail = std::move(detail);
    return e;
}

json diagnostics_json(const ReferenceDiagnostics& d) {
    return {{"xi_half", d.xi_half},
            {"xi_max", d.xi_max},
            {"truncation", d.truncation},
            {"truncation_met", d.truncation_met},
            {"panels", d.panels},
            {"quadrature_error", d.quadrature_error},
            {"exponent_error", d.exponent_error},
            {"tail_mass", d.tail_mass},
            {"monotonicity_violation", d.monotonicity_violation}};
}

}  // namespace

// ---------------------------------------------------------------------------

const LevyLaw& RunConfig::require_law() const {
    if (!law) throw ConfigError("config: law is required");
    return *law;
}

const RationalOperator& RunConfig::require_operator() const {
    if (!op) throw ConfigError("config: operator is required");
    return *op;
}

void RunConfig::check() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be > 0");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be > 0");
    if (h > T) throw ConfigError("h must not exceed T");
    if (op && !boundary.empty() && boundary.size() != static_cast<std::size_t>(op->order())) {
        throw ConfigError("boundary must have deg(P) = " + std::to_string(op->order()) + " values");
    }
}

RunConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, "config", {"law", "operator", "n", "T", "h", "seed", "boundary", "output", "realization",
                                   "validate", "bench"});
    RunConfig c;
    if (doc.contains("law")) c.law = law_from_json(doc["law"]);
    if (doc.contains("operator")) c.op = RationalOperator::from_json(doc["operator"]);
    if (doc.contains("n")) c.n = as_int(doc["n"], "n");
    if (doc.contains("T")) c.T = as_number(doc["T"], "T");
    if (doc.contains("h")) c.h = as_number(doc["h"], "h");
    if (doc.contains("seed")) c.seed = as_seed(doc["seed"], "seed");
    if (doc.contains("boundary")) c.boundary = as_list<double>(doc["boundary"], "boundary", as_number);
    if (doc.contains("output")) {
        const json& o = doc["output"];
        if (!o.is_object()) throw ConfigError("output must be an object");
        reject_unknown(o, "output", {"dir"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw ConfigError("output.dir must be a string");
            c.out_dir = o["dir"].get<std::string>();
        }
    }
    if (doc.contains("realization")) {
        if (!doc["realization"].is_string()) throw ConfigError("realization must be a path string");
        c.realization = doc["realization"].get<std::string>();
    }
    if (doc.contains("validate")) c.validate = validate_config(doc["validate"]);
    if (doc.contains("bench")) c.bench = bench_config(doc["bench"]);
    c.check();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    const std::string body = text.str();
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path.string() + ": " + e.what(), e.byte);
    }
    return config_from_json(doc);
}

// ---------------------------------------------------------------------------

json report_to_json(const Report& report) {
    json entries = json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"metric", e.metric},
                           {"value", opt_json(e.value)},
                           {"target", opt_json(e.target)},
                           {"tolerance", opt_json(e.tolerance)},
                           {"pass", e.pass ? json(*e.pass) : json(nullptr)},
                           {"status", e.status},
                           {"detail", e.detail}});
    }
    return {{"format", "sparsegen.report"},
            {"version", 1},
            {"entries", std::move(entries)},
            {"diagnostics", report.diagnostics}};
}

Report report_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", std::string{}) != "sparsegen.report") {
        throw ConfigError("report: format must be 'sparsegen.report'");
    }
    if (!doc.contains("entries") || !doc["entries"].is_array()) throw ConfigError("report.entries must be an array");
    Report r;
    for (const auto& e : doc["entries"]) {
        if (!e.is_object() || !e.contains("metric") || !e["metric"].is_string() || !e.contains("status") ||
            !e["status"].is_string()) {
            throw ConfigError("report entries need string 'metric' and 'status'");
        }
        ReportEntry entry;
        entry.metric = e["metric"].get<std::string>();
        entry.value = opt_number(e, "value");
        entry.target = opt_number(e, "target");
        entry.tolerance = opt_number(e, "tolerance");
        if (e.contains("pass") && !e["pass"].is_null()) {
            if (!e["pass"].is_boolean()) throw ConfigError("report entry.pass must be a boolean or null");
            entry.pass = e["pass"].get<bool>();
        }
        entry.status = e["status"].get<std::string>();
        entry.detail = e.value("detail", std::string{});
        r.entries.push_back(std::move(entry));
    }
    if (doc.contains("diagnostics")) r.diagnostics = doc["diagnostics"];
    return r;
}

// ---------------------------------------------------------------------------

GenerateOutputs cmd_generate(const RunConfig& config) {
    config.check();
    const Generated g = generate(config.require_law(), config.require_operator(), config.n, config.T, config.h,
                                 config.seed, config.boundary);
    ensure_dir(config.out_dir);
    GenerateOutputs out;
    out.trajectory = config.out_dir / "trajectory.csv";
    out.realization = config.out_dir / "realization.json";
    out.provenance = config.out_dir / "provenance.json";
    write_trajectory_csv(g.trajectory, out.trajectory);
    save_realization_file(g.realization, out.realization);
    write_text(out.provenance, g.trajectory.provenance.dump(2) + "\n");
    out.warnings = warnings_of(g.trajectory);
    return out;
}

GenerateOutputs cmd_resample(const RunConfig& config) {
    if (config.realization.empty()) throw ConfigError("resample: realization is required (--realization)");
    const RationalOperator& op = config.require_operator();
    const InnovationRealization r = load_realization_file(config.realization);
    if (!(config.h > 0.0)) throw ConfigError("h must be > 0");
    if (config.h > r.T) {
        throw ConfigError("h = " + format_double(config.h) + " exceeds the realization length T = " +
                          format_double(r.T));
    }
    Trajectory t = synthesize(r, op, config.h, config.boundary);
    t.provenance["source"] = config.realization.filename().string();
    ensure_dir(config.out_dir);
    GenerateOutputs out;
    out.trajectory = config.out_dir / "trajectory.csv";
    out.provenance = config.out_dir / "provenance.json";
    write_trajectory_csv(t, out.trajectory);
    write_text(out.provenance, t.provenance.dump(2) + "\n");
    out.warnings = warnings_of(t);
    return out;
}

ValidateOutputs cmd_validate(const RunConfig& config) {
    config.check();
    const LevyLaw& law = config.require_law();
    const RationalOperator& op = config.require_operator();
    const ValidateConfig& v = config.validate;
    ValidateOutputs out;
    Report& report = out.report;
    report.diagnostics["law"] = law_to_json(law);
    report.diagnostics["operator"] = op.to_json();

    if (v.tune) {
        TuneOptions opts;
        opts.threshold = v.threshold;
        opts.samples = v.samples;
        opts.repetitions = v.repetitions;
        opts.seed = config.seed;
        opts.schedule = v.n_schedule;
        if (opts.schedule.empty()) {
            const std::vector<double> jumps = v.n_jumps.empty() ? std::vector<double>{0.1, 1.0, 10.0} : v.n_jumps;
            for (double nj : jumps) opts.schedule.push_back(std::max<std::int64_t>(1, std::llround(nj / config.h)));
        }
        const TuneResult tuned = tune_n(law, op, config.h, opts);
        out.curve = tuned.curve;
        ReportEntry chosen;
        chosen.metric = "ks.selected_n";
        if (tuned.chosen_n) chosen.value = static_cast<double>(*tuned.chosen_n);
        chosen.target = v.threshold;
        chosen.pass = tuned.met;
        chosen.status = tuned.met ? "pass" : "fail";
        chosen.detail = tuned.met ? "first scheduled n with median KS <= threshold"
                                  : "schedule exhausted without meeting the threshold";
        report.entries.push_back(chosen);
        for (const auto& p : tuned.curve) {
            ReportEntry e;
            e.metric = "ks.n=" + std::to_string(p.n);
            e.value = p.ks;
            e.target = v.threshold;
            e.status = "info";
            e.detail = "median KS over " + std::to_string(v.repetitions) + " repetitions, n_jumps = " +
                       format_double(p.n_jumps);
            report.entries.push_back(e);
        }
        ReportEntry base;
        base.metric = "ks.baseline";
        base.value = tuned.baseline;
        base.status = "info";
        base.detail = "median KS of exact reference samples at the same count";
        report.entries.push_back(base);
        report.diagnostics["reference_cdf"] = diagnostics_json(tuned.reference);
    }

    if (v.second_order) {
        const SecondOrderConfig& so = *v.second_order;
        if (!law.variance()) {
            ReportEntry e;
            e.metric = "second_order.cross_moment";
            e.status = "not_applicable";
            e.detail = "the " + law.family_name() + " law has infinite variance";
            report.entries.push_back(e);
        } else {
            const SecondOrderResult res = second_order_check(law, config.n, so.phi1, so.phi2, so.trials, config.seed);
            report.entries.push_back(checked_entry("second_order.cross_moment", res.estimate, res.target,
                                                   3.0 * res.standard_error,
                                                   "mean of <phi1, w_n><phi2, w_n> over " +
                                                       std::to_string(res.trials) + " trials; tolerance 3 SE"));
        }
    }

    if (v.fractional_moment) {
        const FractionalMomentConfig& fm = *v.fractional_moment;
        const double h = fm.h > 0.0 ? fm.h : fm.window / 100.0;
        const double T = fm.T > 0.0 ? fm.T : fm.window + 2.0 * h;
        const auto* stable = std::get_if<Stable>(&law.family());
        if (stable && stable->alpha <= fm.p) {
            ReportEntry e;
            e.metric = "fractional_moment";
            e.status = "not_applicable";
            e.detail = "E|X|^p is infinite for alpha <= p";
            report.entries.push_back(e);
        } else {
            const auto target = fractional_target(law, op, fm.window, fm.p);
            const std::vector<std::int64_t> schedule = fm.n_schedule.empty() ? std::vector{config.n} : fm.n_schedule;
            for (const auto n : schedule) {
                const auto obs = simulate_window_integrals(law, op, n, T, h, fm.window, fm.trials, config.seed);
                const MomentEstimate est = fractional_moment(std::span<const double>(obs), fm.p);
                const std::string metric = "fractional_moment.n=" + std::to_string(n);
                const std::string detail = "mean |<rect[0, window], s_n>|^p over " + std::to_string(est.count) +
                                           " trajectories, standard error " + format_double(est.standard_error);
                if (target) {
                    report.entries.push_back(
                        checked_entry(metric, est.value, *target, 3.0 * est.standard_error, detail + "; tolerance 3 SE"));
                } else {
                    ReportEntry e;
                    e.metric = metric;
                    e.value = est.value;
                    e.status = "info";
                    e.detail = detail + "; no closed-form target for this law and operator";
                    report.entries.push_back(e);
                }
            }
        }
    }

    ensure_dir(config.out_dir);
    out.report_path = config.out_dir / "report.json";
    out.curve_path = config.out_dir / "ks_curve.csv";
    write_text(out.report_path, report_to_json(report).dump(2) + "\n");
    std::string csv = "n_jumps,ks\n";
    for (const auto& p : out.curve) csv += format_double(p.n_jumps) + "," + format_double(p.ks) + "\n";
    write_text(out.curve_path, csv);
    return out;
}

// ---------------------------------------------------------------------------

TimingRow time_method(const std::string& method, const InnovationRealization& r, const RationalOperator& op,
                      double h, int repetitions) {
    if (method != "bspline" && method != "direct") throw ConfigError("unknown method '" + method + "'");
    std::vector<double> seconds;
    volatile double sink = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        const Trajectory t = method == "bspline" ? synthesize(r, op, h)
                                                 : direct_green_eval(r, greens_function(op), h, r.T);
        const auto stop = std::chrono::steady_clock::now();
        sink = sink + (t.values.empty() ? 0.0 : t.values.back());
        seconds.push_back(std::chrono::duration<double>(stop - start).count());
    }
    return TimingRow{method, r.n, r.size(), grid_size(r.T, h), median(seconds)};
}

BenchOutputs cmd_bench(const RunConfig& config) {
    config.check();
    const LevyLaw& law = config.require_law();
    const RationalOperator& op = config.require_operator();
    const BenchConfig& b = config.bench;
    BenchOutputs out;

    std::vector<double> k_axis, direct_k, bspline_k;
    for (const auto n : b.n_sweep) {
        const auto r = simulate_innovation(law, n, config.T, config.seed);
        const TimingRow d = time_method("direct", r, op, config.h, b.repetitions);
        const TimingRow s = time_method("bspline", r, op, config.h, b.repetitions);
        out.rows.push_back(d);
        out.rows.push_back(s);
        k_axis.push_back(static_cast<double>(r.size()));
        direct_k.push_back(d.median_seconds);
        bspline_k.push_back(s.median_seconds);
    }
    std::vector<double> g_axis, direct_g, bspline_g;
    if (!b.grid_sweep.empty()) {
        const auto r = simulate_innovation(law, b.fixed_n, config.T, config.seed);
        for (const auto grid : b.grid_sweep) {
            const double h = config.T / static_cast<double>(grid);
            const TimingRow d = time_method("direct", r, op, h, b.repetitions);
            const TimingRow s = time_method("bspline", r, op, h, b.repetitions);
            out.rows.push_back(d);
            out.rows.push_back(s);
            g_axis.push_back(static_cast<double>(d.grid));
            direct_g.push_back(d.median_seconds);
            bspline_g.push_back(s.median_seconds);
        }
    }
    json fits = json::object();
    const auto fit_json = [](const LinearFit& f) {
        return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
    };
    if (k_axis.size() >= 2) {
        out.direct_vs_K = linear_fit(k_axis, direct_k);
        out.bspline_vs_K = linear_fit(k_axis, bspline_k);
        fits["direct_vs_K"] = fit_json(out.direct_vs_K);
        fits["bspline_vs_K"] = fit_json(out.bspline_vs_K);
    }
    if (g_axis.size() >= 2) {
        out.direct_vs_grid = linear_fit(g_axis, direct_g);
        out.bspline_vs_grid = linear_fit(g_axis, bspline_g);
        fits["direct_vs_grid"] = fit_json(out.direct_vs_grid);
        fits["bspline_vs_grid"] = fit_json(out.bspline_vs_grid);
    }

    ensure_dir(config.out_dir);
    out.timing_path = config.out_dir / "timing.csv";
    out.fits_path = config.out_dir / "timing_fits.json";
    std::string csv = "method,n,K,grid,median_seconds\n";
    for (const auto& row : out.rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%s,%lld,%zu,%zu,%.9g\n", row.method.c_str(), static_cast<long long>(row.n),
                      row.K, row.grid, row.median_seconds);
        csv += line;
    }
    write_text(out.timing_path, csv);
    write_text(out.fits_path, fits.dump(2) + "\n");
    return out;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"sparsegen: sparse stochastic processes from compound-Poisson innovations"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::int64_t n = 0;
    double T = 0.0;
    double h = 0.0;
    std::string realization;
    double threshold = 0.0;

    std::vector<std::pair<std::string, CLI::Option*>> flags;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        flags.emplace_back("seed", sub->add_option("--seed", seed, "root RNG seed"));
        flags.emplace_back("out", sub->add_option("--out", out_dir, "output directory"));
        flags.emplace_back("n", sub->add_option("--n", n, "impulse rate (approximation level)"));
        flags.emplace_back("T", sub->add_option("--T", T, "interval length"));
        flags.emplace_back("h", sub->add_option("--h", h, "grid step"));
    };
    auto* generate = app.add_subcommand("generate", "simulate a trajectory and its realization");
    auto* resample = app.add_subcommand("resample", "re-synthesize a saved realization on a new grid");
    auto* validate = app.add_subcommand("validate", "KS tuning, second-order and fractional-moment checks");
    auto* bench = app.add_subcommand("bench", "time the B-spline pipeline against direct evaluation");
    for (auto* sub : {generate, resample, validate, bench}) common(sub);
    flags.emplace_back("realization", resample->add_option("--realization", realization, "realization JSON")
                                          ->check(CLI::ExistingFile));
    flags.emplace_back("threshold", validate->add_option("--threshold", threshold, "KS threshold"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        json doc = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            std::ostringstream text;
            text << in.rdbuf();
            try {
                doc = json::parse(text.str());
            } catch (const json::parse_error& e) {
                throw ParseError("config " + config_path + ": " + e.what(), e.byte);
            }
            if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        }
        for (const auto& [name, opt] : flags) {
            if (opt->count() == 0) continue;
            if (name == "seed") doc["seed"] = seed;
            if (name == "out") doc["output"]["dir"] = out_dir;
            if (name == "n") doc["n"] = n;
            if (name == "T") doc["T"] = T;
            if (name == "h") doc["h"] = h;
            if (name == "realization") doc["realization"] = realization;
            if (name == "threshold") {
                if (!doc.contains("validate")) doc["validate"] = json::object();
                doc["validate"]["threshold"] = threshold;
            }
        }
        const RunConfig config = config_from_json(doc);

        if (*generate) {
            const auto o = cmd_generate(config);
            for (const auto& w : o.warnings) err << "warning: " << w << "\n";
            out << "wrote " << o.trajectory.string() << ", " << o.realization.string() << ", "
                << o.provenance.string() << "\n";
        } else if (*resample) {
            const auto o = cmd_resample(config);
            for (const auto& w : o.warnings) err << "warning: " << w << "\n";
            out << "wrote " << o.trajectory.string() << ", " << o.provenance.string() << "\n";
        } else if (*validate) {
            const auto o = cmd_validate(config);
            for (const auto& e : o.report.entries) {
                out << e.status << "  " << e.metric;
                if (e.value) out << "  value=" << format_double(*e.value);
                if (e.target) out << "  target=" << format_double(*e.target);
                if (e.tolerance) out << "  tol=" << format_double(*e.tolerance);
                out << "\n";
            }
            out << "wrote " << o.report_path.string() << ", " << o.curve_path.string() << "\n";
        } else if (*bench) {
            const auto o = cmd_bench(config);
            for (const auto& row : o.rows) {
                out << row.method << " n=" << row.n << " K=" << row.K << " grid=" << row.grid
                    << " median=" << format_double(row.median_seconds) << "s\n";
            }
            out << "direct vs K: slope=" << format_double(o.direct_vs_K.slope)
                << " R^2=" << format_double(o.direct_vs_K.r_squared) << "\n";
            out << "bspline vs K: slope=" << format_double(o.bspline_vs_K.slope)
                << " R^2=" << format_double(o.bspline_vs_K.r_squared) << "\n";
            out << "wrote " << o.timing_path.string() << ", " << o.fits_path.string() << "\n";
        }
        return 0;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << " (byte " << e.position() << ")\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what();
        if (e.achieved() != 0.0) err << " (achieved " << format_double(e.achieved()) << ")";
        err << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace sparsegen::cli
