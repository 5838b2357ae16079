#include "fracwsgl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "fracwsgl/fode.hpp"
#include "fracwsgl/problems.hpp"
#include "fracwsgl/specfun.hpp"
#include "fracwsgl/tfpde.hpp"

namespace fracwsgl {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

double parse_number(const std::string& text, const std::string& key) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(value)) {
        throw InvalidParameter("key '" + key + "': '" + text + "' is not a number");
    }
    return value;
}

std::size_t parse_count(const std::string& text, const std::string& key) {
    const double v = parse_number(text, key);
    if (v < 0.0 || v != std::floor(v) || v > 1e9) {
        throw InvalidParameter("key '" + key + "': '" + text + "' is not a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& text, const std::string& key) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "yes" || t == "on" || t == "1") {
        return true;
    }
    if (t == "false" || t == "no" || t == "off" || t == "0") {
        return false;
    }
    throw InvalidParameter("key '" + key + "': '" + text + "' is not a boolean");
}

StudyKind parse_kind(const std::string& text) {
    if (text == "weights") return StudyKind::weights;
    if (text == "diagnostics") return StudyKind::diagnostics;
    if (text == "operator") return StudyKind::operator_error;
    if (text == "fode") return StudyKind::fode;
    if (text == "wave") return StudyKind::wave;
    if (text == "subdiffusion" || text == "subdiff") return StudyKind::subdiffusion;
    throw InvalidParameter("unknown study kind '" + text + "'");
}

Norm parse_norm(const std::string& text) {
    if (text == "max") return Norm::max;
    if (text == "final") return Norm::final;
    if (text == "avg") return Norm::avg;
    throw InvalidParameter("unknown norm '" + text + "'");
}

std::string format(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

std::string short_number(double v) { return format("%g", v); }

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "kind",         "problem",      "method",          "alpha",          "alpha1",
        "alpha2",       "lambda",       "T",               "tau",            "m",
        "sigma_rule",   "sigma_slope",  "sigma_shift",     "sigma_offset",   "sigmas",
        "norm",         "reference",    "reference_cache", "wave_corrections",
        "drop_far_field", "source_rule", "breakpoints",    "degrees",        "K",
        "output"};
    return keys;
}

double default_horizon(const std::string& problem) { return problem == "cubic" ? 10.0 : 1.0; }

StudyConfig build_config(const std::string& name, const std::map<std::string, std::string>& kv) {
    StudyConfig c;
    c.name = name;
    for (const auto& [key, value] : kv) {
        if (!known_keys().count(key)) {
            throw InvalidParameter("[" + name + "]: unknown key '" + key + "'");
        }
    }
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    try {
        if (const auto* v = get("kind")) {
            c.kind = parse_kind(*v);
        } else {
            throw InvalidParameter("missing key 'kind'");
        }
        if (const auto* v = get("problem")) c.problem = *v;
        c.T = default_horizon(c.problem);
        if (const auto* v = get("T")) c.T = parse_number(*v, "T");
        if (const auto* v = get("method")) c.methods = split_list(*v);
        if (const auto* v = get("alpha")) {
            c.alphas.clear();
            for (const auto& s : split_list(*v)) c.alphas.push_back(parse_number(s, "alpha"));
        }
        if (const auto* v = get("alpha1")) c.alpha1 = parse_number(*v, "alpha1");
        if (const auto* v = get("alpha2")) c.alpha2 = parse_number(*v, "alpha2");
        if (const auto* v = get("lambda")) c.lambda = parse_number(*v, "lambda");
        if (const auto* v = get("tau")) {
            for (const auto& s : split_list(*v)) c.taus.push_back(parse_step(s, c.T));
        }
        if (const auto* v = get("m")) {
            c.ms.clear();
            for (const auto& s : split_list(*v)) c.ms.push_back(parse_count(s, "m"));
        }
        if (const auto* v = get("sigma_rule")) {
            const std::string& r = *v;
            if (r == "k*alpha") {
                c.sigma.kind = SigmaRule::Kind::linear;
            } else if (r == "(k+1)*alpha") {
                c.sigma.kind = SigmaRule::Kind::linear;
                c.sigma.shift = 1.0;
            } else if (r == "k*alpha+offset" || r == "linear") {
                c.sigma.kind = SigmaRule::Kind::linear;
            } else if (r == "list") {
                c.sigma.kind = SigmaRule::Kind::list;
            } else if (r == "guideline") {
                c.sigma.kind = SigmaRule::Kind::guideline;
            } else if (r == "problem") {
                c.sigma.kind = SigmaRule::Kind::problem;
            } else {
                throw InvalidParameter("unknown sigma_rule '" + r + "'");
            }
        }
        if (const auto* v = get("sigma_slope")) {
            if (*v != "alpha") c.sigma.slope = parse_number(*v, "sigma_slope");
        }
        if (const auto* v = get("sigma_shift")) c.sigma.shift = parse_number(*v, "sigma_shift");
        if (const auto* v = get("sigma_offset")) c.sigma.offset = parse_number(*v, "sigma_offset");
        if (const auto* v = get("sigmas")) {
            for (const auto& s : split_list(*v)) c.sigma.list.push_back(parse_number(s, "sigmas"));
        }
        const bool pde = c.kind == StudyKind::wave || c.kind == StudyKind::subdiffusion;
        c.norms = {pde ? Norm::final : Norm::max};
        if (const auto* v = get("norm")) {
            c.norms.clear();
            for (const auto& s : split_list(*v)) c.norms.push_back(parse_norm(s));
        }
        if (const auto* v = get("reference")) {
            const auto colon = v->find(':');
            if (*v == "exact") {
                c.reference.kind = ReferenceSpec::Kind::exact;
            } else if (colon != std::string::npos) {
                const std::string head = trim(v->substr(0, colon));
                c.reference.kind =
                    head == "self" ? ReferenceSpec::Kind::self : ReferenceSpec::Kind::method;
                c.reference.method = head;
                c.reference.tau = parse_step(trim(v->substr(colon + 1)), c.T);
            } else {
                throw InvalidParameter("reference must be 'exact' or '<method>:<step>'");
            }
        }
        if (const auto* v = get("reference_cache")) c.reference_cache = *v;
        if (const auto* v = get("wave_corrections")) {
            if (*v == "all") {
                c.wave_all_corrections = true;
            } else if (*v != "m3") {
                throw InvalidParameter("wave_corrections must be 'm3' or 'all'");
            }
        }
        if (const auto* v = get("drop_far_field")) c.drop_far_field = parse_bool(*v, "drop_far_field");
        if (const auto* v = get("source_rule")) {
            if (*v == "midpoint") {
                c.midpoint_source = true;
            } else if (*v != "average") {
                throw InvalidParameter("source_rule must be 'average' or 'midpoint'");
            }
        }
        if (const auto* v = get("breakpoints")) {
            for (const auto& s : split_list(*v)) c.breakpoints.push_back(parse_number(s, "breakpoints"));
        }
        if (const auto* v = get("degrees")) {
            for (const auto& s : split_list(*v)) c.degrees.push_back(parse_count(s, "degrees"));
        }
        if (const auto* v = get("K")) c.K = parse_count(*v, "K");
        if (const auto* v = get("output")) c.output = *v;
        c.validate();
    } catch (const InvalidParameter& e) {
        throw InvalidParameter("[" + name + "]: " + e.what());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Worker pool.

void run_parallel(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& task,
                  const std::function<std::string(std::size_t)>& describe,
                  const std::string& study) {
    std::vector<std::string> failures(count);
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), count);
    if (threads <= 1) {
        loop();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(loop);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!failures[i].empty()) {
            throw StudyError("study '" + study + "', " + describe(i) + ": " + failures[i]);
        }
    }
}

// ---------------------------------------------------------------------------
// Columns and cells of convergence studies.

struct Column {
    std::string label;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::string method;
    std::size_t m = 0;
};

std::vector<Column> build_columns(const StudyConfig& c) {
    std::vector<double> alphas = c.alphas;
    if (alphas.empty()) {
        alphas.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    std::vector<Column> columns;
    for (double a : alphas) {
        for (const auto& method : c.methods) {
            const bool corrected = method == "wsgl";
            const std::vector<std::size_t> ms = corrected ? c.ms : std::vector<std::size_t>{0};
            for (std::size_t m : ms) {
                std::string label;
                if (c.alphas.size() > 1) {
                    label = "a" + short_number(a);
                }
                if (!corrected || c.methods.size() > 1) {
                    label += (label.empty() ? "" : "_") + method;
                }
                if (corrected) {
                    label += (label.empty() ? "m" : "_m") + std::to_string(m);
                }
                columns.push_back({label, a, method, m});
            }
        }
    }
    return columns;
}

std::string tau_text(double tau) { return format("%.10g", tau); }

/// Errors per requested norm, for one (column, τ) cell.
using CellErrors = std::vector<double>;

template <typename Solution>
struct ConvergencePlan {
    std::vector<Column> columns;
    std::function<Solution(const Column&, double)> solve;
    /// Empty when the column is measured against an exact solution.
    std::function<std::string(const Column&)> reference_key;
    std::function<Solution(const Column&)> reference;
    std::function<CellErrors(const Column&, const Solution&, const Solution*)> errors;
};

template <typename Solution>
ConvergenceTable run_convergence(const StudyConfig& c, const ConvergencePlan<Solution>& plan,
                                 std::size_t workers) {
    const auto& columns = plan.columns;

    std::vector<std::string> ref_keys;
    std::vector<std::size_t> ref_owner;
    std::vector<std::size_t> column_ref(columns.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const std::string key = plan.reference_key(columns[j]);
        if (key.empty()) {
            continue;
        }
        const auto it = std::find(ref_keys.begin(), ref_keys.end(), key);
        if (it == ref_keys.end()) {
            column_ref[j] = ref_keys.size();
            ref_keys.push_back(key);
            ref_owner.push_back(j);
        } else {
            column_ref[j] = static_cast<std::size_t>(it - ref_keys.begin());
        }
    }
    std::vector<Solution> refs(ref_keys.size());
    run_parallel(
        ref_keys.size(), workers,
        [&](std::size_t i) { refs[i] = plan.reference(columns[ref_owner[i]]); },
        [&](std::size_t i) { return "reference " + ref_keys[i]; }, c.name);

    const std::size_t rows = c.taus.size();
    std::vector<CellErrors> cells(columns.size() * rows);
    run_parallel(
        cells.size(), workers,
        [&](std::size_t i) {
            const Column& col = columns[i / rows];
            const double tau = c.taus[i % rows];
            const Solution sol = plan.solve(col, tau);
            const std::size_t r = column_ref[i / rows];
            cells[i] = plan.errors(col, sol, r < refs.size() ? &refs[r] : nullptr);
        },
        [&](std::size_t i) {
            return "cell " + columns[i / rows].label + " tau=" + tau_text(c.taus[i % rows]);
        },
        c.name);

    ConvergenceTable table;
    table.taus = c.taus;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t k = 0; k < c.norms.size(); ++k) {
            ConvergenceColumn col;
            col.label = columns[j].label;
            col.norm = c.norms[k];
            for (std::size_t r = 0; r < rows; ++r) {
                col.errors.push_back(cells[j * rows + r][k]);
            }
            col.orders.push_back(std::nullopt);
            for (const auto& o : observed_order(col.errors)) {
                col.orders.push_back(o);
            }
            table.columns.push_back(std::move(col));
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// FODE studies.

MultiTermProblem make_fode(const StudyConfig& c, double alpha) {
    if (c.problem == "mittag-leffler") {
        return problems::two_term_mittag_leffler(alpha, c.T);
    }
    if (c.problem == "cubic") {
        return problems::cubic_two_term(c.alpha1, c.alpha2, c.T);
    }
    if (c.problem == "linear-decay") {
        return problems::linear_decay(c.lambda, alpha, c.T);
    }
    throw InvalidParameter("unknown fode problem '" + c.problem + "'");
}

CorrectionSet fode_default_sigmas(const StudyConfig& c, double alpha, std::size_t m) {
    if (c.problem == "mittag-leffler") {
        return CorrectionSet::linear(m, alpha, 1.0);
    }
    if (c.problem == "cubic") {
        return two_term_sigma_guideline(c.alpha1, c.alpha2, m);
    }
    return CorrectionSet::linear(m, alpha);
}

SampledPath solve_fode(const StudyConfig& c, const MultiTermProblem& p, const Column& col,
                       double tau) {
    SolverConfig sc;
    sc.tau = tau;
    if (col.method == "wsgl") {
        if (col.m > 0) {
            const double a2 = p.terms() > 1 ? p.alphas[1] : 0.0;
            sc.corrections = {c.sigma.build(col.m, col.alpha, p.alphas[0], a2,
                                            fode_default_sigmas(c, col.alpha, col.m))};
        }
        return solve_corrected_wsgl(p, sc);
    }
    if (col.method == "l1") {
        return solve_l1(p, sc);
    }
    if (col.method == "trapezoidal") {
        return solve_trapezoidal(p, sc);
    }
    throw InvalidParameter("unknown fode method '" + col.method + "'");
}

std::string sanitize(const std::string& key) {
    std::string out;
    for (char ch : key) {
        out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' ? ch : '_';
    }
    return out;
}

bool load_cached_path(const std::string& file, double tau, std::size_t steps, SampledPath& out) {
    std::ifstream in(file);
    if (!in) {
        return false;
    }
    std::string line;
    if (!std::getline(in, line) || line != "t,y") {
        return false;
    }
    SampledPath path;
    path.tau = tau;
    path.values.reserve(steps + 1);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            return false;
        }
        path.values.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    if (path.values.size() != steps + 1) {
        return false;
    }
    out = std::move(path);
    return true;
}

void store_cached_path(const std::string& file, const SampledPath& path) {
    const std::string tmp = file + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw Error("cannot write reference cache '" + tmp + "'");
        }
        out << "t,y\n";
        char buf[80];
        for (std::size_t n = 0; n < path.values.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", path.time(n), path.values[n]);
            out << buf;
        }
    }
    std::filesystem::rename(tmp, file);
}

std::function<double(double)> fode_exact(const StudyConfig& c, double alpha) {
    if (c.problem == "mittag-leffler") {
        return [alpha](double t) { return problems::two_term_mittag_leffler_exact(alpha, t); };
    }
    if (c.problem == "linear-decay") {
        const double lambda = c.lambda;
        return [alpha, lambda](double t) {
            return mittag_leffler(alpha, -lambda * std::pow(t, alpha));
        };
    }
    throw InvalidParameter("problem '" + c.problem + "' has no exact solution; use a reference");
}

ConvergenceTable run_fode(const StudyConfig& c, std::size_t workers) {
    ConvergencePlan<SampledPath> plan;
    plan.columns = build_columns(c);
    plan.solve = [&c](const Column& col, double tau) {
        return solve_fode(c, make_fode(c, col.alpha), col, tau);
    };
    plan.reference_key = [&c](const Column& col) -> std::string {
        if (c.reference.kind == ReferenceSpec::Kind::exact) {
            return {};
        }
        const auto p = make_fode(c, col.alpha);
        std::string key = c.problem;
        for (double a : p.alphas) key += "_a" + short_number(a);
        if (c.problem == "linear-decay") key += "_l" + short_number(c.lambda);
        key += "_T" + short_number(c.T) + "_";
        if (c.reference.kind == ReferenceSpec::Kind::self) {
            key += col.method + (col.method == "wsgl" ? "_m" + std::to_string(col.m) : "");
        } else {
            key += c.reference.method;
        }
        return key + "_n" + std::to_string(step_count(c.T, c.reference.tau));
    };
    plan.reference = [&c, &plan](const Column& col) {
        Column ref_col = col;
        if (c.reference.kind == ReferenceSpec::Kind::method) {
            ref_col.method = c.reference.method;
            ref_col.m = 0;
        }
        const std::size_t steps = step_count(c.T, c.reference.tau);
        std::string file;
        if (!c.reference_cache.empty()) {
            std::filesystem::create_directories(c.reference_cache);
            file = (std::filesystem::path(c.reference_cache) /
                    (sanitize(plan.reference_key(col)) + ".csv"))
                       .string();
            SampledPath cached;
            if (load_cached_path(file, c.reference.tau, steps, cached)) {
                return cached;
            }
        }
        SampledPath path = solve_fode(c, make_fode(c, col.alpha), ref_col, c.reference.tau);
        if (!file.empty()) {
            store_cached_path(file, path);
        }
        return path;
    };
    plan.errors = [&c](const Column& col, const SampledPath& sol, const SampledPath* ref) {
        const ErrorReport r = ref ? error_report(sol, *ref) : error_report(sol, fode_exact(c, col.alpha));
        CellErrors e;
        for (Norm n : c.norms) {
            e.push_back(n == Norm::max ? r.max_error : n == Norm::final ? r.final_error : r.avg_error);
        }
        return e;
    };
    return run_convergence(c, plan, workers);
}

// ---------------------------------------------------------------------------
// PDE studies.

std::optional<SpectralMesh> mesh_override(const StudyConfig& c) {
    if (c.breakpoints.empty() && c.degrees.empty()) {
        return std::nullopt;
    }
    return SpectralMesh(c.breakpoints, c.degrees);
}

CellErrors field_errors(const StudyConfig& c, const SpectralMesh& mesh, const FieldHistory& h,
                        const FieldHistory* ref, const SpaceTimeFunction& exact) {
    CellErrors e;
    for (Norm n : c.norms) {
        if (n == Norm::final) {
            e.push_back(ref ? l2_error(h, *ref, mesh, h.steps()) : l2_error(h, mesh, h.steps(), exact));
        } else if (n == Norm::avg) {
            e.push_back(ref ? average_l2_error(h, *ref, mesh) : average_l2_error(h, mesh, exact));
        } else {
            double worst = 0.0;
            for (std::size_t k = 0; k <= h.steps(); ++k) {
                worst = std::max(worst, ref ? l2_error(h, *ref, mesh, k) : l2_error(h, mesh, k, exact));
            }
            e.push_back(worst);
        }
    }
    return e;
}

std::string pde_reference_key(const StudyConfig& c, const Column& col) {
    if (c.reference.kind == ReferenceSpec::Kind::exact) {
        return {};
    }
    std::string key = (std::isnan(col.alpha) ? std::string("base") : "a" + short_number(col.alpha)) + "_";
    if (c.reference.kind == ReferenceSpec::Kind::self) {
        key += col.method + (col.method == "wsgl" ? "_m" + std::to_string(col.m) : "");
    } else {
        key += c.reference.method;
    }
    return key + "_tau" + tau_text(c.reference.tau);
}

WaveProblem make_wave(const StudyConfig& c, double alpha) {
    WaveProblem p;
    if (c.problem == "smooth") {
        p = problems::wave_smooth(alpha);
    } else if (c.problem == "smooth-input") {
        p = problems::wave_smooth_input(alpha);
    } else {
        throw InvalidParameter("unknown wave problem '" + c.problem + "'");
    }
    p.T = c.T;
    if (auto mesh = mesh_override(c)) {
        p.mesh = *mesh;
    }
    return p;
}

FieldHistory solve_wave_column(const StudyConfig& c, const Column& col, double tau) {
    const WaveProblem p = make_wave(c, col.alpha);
    WaveOptions options;
    options.source_rule = c.midpoint_source ? SourceRule::midpoint : SourceRule::average;
    if (col.method == "l1") {
        return solve_wave_l1_baseline(p, tau, options);
    }
    if (col.method != "wsgl") {
        throw InvalidParameter("unknown wave method '" + col.method + "'");
    }
    const CorrectionSet fallback =
        c.problem == "smooth" ? problems::wave_smooth_sigmas() : problems::wave_smooth_input_sigmas();
    WaveCorrections wc;
    wc.sigmas = c.sigma.build(col.m, col.alpha, col.alpha, 0.0, fallback);
    wc.m3 = col.m;
    if (c.wave_all_corrections) {
        wc.m1 = wc.m2 = col.m;
    }
    return solve_wave(p, tau, wc, options);
}

ConvergenceTable run_wave(const StudyConfig& c, std::size_t workers) {
    ConvergencePlan<FieldHistory> plan;
    plan.columns = build_columns(c);
    plan.solve = [&c](const Column& col, double tau) { return solve_wave_column(c, col, tau); };
    plan.reference_key = [&c](const Column& col) { return pde_reference_key(c, col); };
    plan.reference = [&c](const Column& col) {
        Column ref_col = col;
        if (c.reference.kind == ReferenceSpec::Kind::method) {
            ref_col.method = c.reference.method;
        }
        return solve_wave_column(c, ref_col, c.reference.tau);
    };
    plan.errors = [&c](const Column& col, const FieldHistory& h, const FieldHistory* ref) {
        const WaveProblem p = make_wave(c, col.alpha);
        if (!ref && c.problem != "smooth") {
            throw InvalidParameter("problem '" + c.problem + "' has no exact solution; use a reference");
        }
        return field_errors(c, p.mesh, h, ref, problems::wave_smooth_exact);
    };
    return run_convergence(c, plan, workers);
}

SubdiffusionProblem make_subdiffusion(const StudyConfig& c) {
    if (c.problem != "sine") {
        throw InvalidParameter("unknown subdiffusion problem '" + c.problem + "'");
    }
    SubdiffusionProblem p = problems::subdiffusion_sine();
    if (c.alpha1 > 0.0) p.alpha1 = c.alpha1;
    if (c.alpha2 > 0.0) p.alpha2 = c.alpha2;
    p.T = c.T;
    if (auto mesh = mesh_override(c)) {
        p.mesh = *mesh;
    }
    return p;
}

FieldHistory solve_subdiffusion_column(const StudyConfig& c, const Column& col, double tau) {
    const SubdiffusionProblem p = make_subdiffusion(c);
    if (col.method == "l1") {
        return solve_subdiffusion_l1_baseline(p, tau);
    }
    if (col.method != "wsgl") {
        throw InvalidParameter("unknown subdiffusion method '" + col.method + "'");
    }
    SubdiffusionCorrections sc;
    sc.sigmas = c.sigma.build(col.m, p.alpha1, p.alpha1, p.alpha2,
                              problems::subdiffusion_sine_sigmas(col.m));
    sc.m1 = sc.m2 = col.m;
    sc.drop_far_field = c.drop_far_field;
    return solve_subdiffusion(p, tau, sc);
}

ConvergenceTable run_subdiffusion(const StudyConfig& c, std::size_t workers) {
    ConvergencePlan<FieldHistory> plan;
    plan.columns = build_columns(c);
    plan.solve = [&c](const Column& col, double tau) {
        return solve_subdiffusion_column(c, col, tau);
    };
    plan.reference_key = [&c](const Column& col) { return pde_reference_key(c, col); };
    plan.reference = [&c](const Column& col) {
        Column ref_col = col;
        if (c.reference.kind == ReferenceSpec::Kind::method) {
            ref_col.method = c.reference.method;
        }
        return solve_subdiffusion_column(c, ref_col, c.reference.tau);
    };
    plan.errors = [&c](const Column&, const FieldHistory& h, const FieldHistory* ref) {
        if (!ref) {
            throw InvalidParameter("problem '" + c.problem + "' has no exact solution; use a reference");
        }
        return field_errors(c, make_subdiffusion(c).mesh, h, ref, {});
    };
    return run_convergence(c, plan, workers);
}

// ---------------------------------------------------------------------------
// Tables that are not convergence studies.

std::string run_weights(const StudyConfig& c) {
    std::vector<GLWeightTable> omega;
    std::vector<WSGLWeightTable> g;
    for (double a : c.alphas) {
        omega.emplace_back(a, c.K);
        g.emplace_back(omega.back());
    }
    std::ostringstream out;
    out << "k";
    for (double a : c.alphas) {
        const std::string prefix = c.alphas.size() > 1 ? "a" + short_number(a) + "_" : "";
        out << ',' << prefix << "omega," << prefix << 'g';
    }
    out << '\n';
    for (std::size_t k = 0; k <= c.K; ++k) {
        out << k;
        for (std::size_t i = 0; i < c.alphas.size(); ++i) {
            out << ',' << format("%.17g", omega[i][k]) << ',' << format("%.17g", g[i][k]);
        }
        out << '\n';
    }
    return out.str();
}

std::string run_diagnostics(const StudyConfig& c, std::size_t workers) {
    const std::size_t cols = c.ms.size();
    std::vector<VandermondeDiagnostics> cells(c.alphas.size() * cols);
    run_parallel(
        cells.size(), workers,
        [&](std::size_t i) {
            const double a = c.alphas[i / cols];
            const std::size_t m = c.ms[i % cols];
            cells[i] = vandermonde_diagnostics(a, c.sigma.build(m, a, a, 0.0, CorrectionSet::linear(m, a)));
        },
        [&](std::size_t i) {
            return "cell alpha=" + short_number(c.alphas[i / cols]) + " m=" + std::to_string(c.ms[i % cols]);
        },
        c.name);
    std::ostringstream out;
    out << "alpha,m,condition_number,residual\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out << short_number(c.alphas[i / cols]) << ',' << c.ms[i % cols] << ','
            << format("%.4e", cells[i].condition_number) << ',' << format("%.4e", cells[i].max_residual)
            << '\n';
    }
    return out.str();
}

struct PowerSum {
    std::vector<double> exponents;
    double value(double t) const {
        double s = 0.0;
        for (double e : exponents) s += std::pow(t, e);
        return s;
    }
    double rl(double alpha, double t) const {
        double s = 0.0;
        for (double e : exponents) s += rl_deriv_power(alpha, e, t);
        return s;
    }
};

std::string run_operator(const StudyConfig& c, std::size_t workers) {
    const double tau = c.taus.front();
    const std::size_t steps = step_count(c.T, tau);
    const auto columns = build_columns(c);
    std::vector<std::vector<double>> errors(columns.size());
    run_parallel(
        columns.size(), workers,
        [&](std::size_t j) {
            const double a = columns[j].alpha;
            PowerSum u;
            CorrectionSet fallback;
            if (c.problem == "power") {
                u.exponents = {8.0 * a};
                fallback = CorrectionSet::linear(columns[j].m, a);
            } else if (c.problem == "power-sum") {
                u.exponents = {8.0 * a, 9.0 * a, 10.0 * a, 11.0 * a};
                fallback = CorrectionSet::linear(columns[j].m, a, 7.0);
            } else {
                throw InvalidParameter("unknown operator problem '" + c.problem + "'");
            }
            const CorrectionSet set = c.sigma.build(columns[j].m, a, a, 0.0, fallback);
            const SampledPath path =
                SampledPath::sample([&u](double t) { return u.value(t); }, tau, steps);
            const CorrectedWsglOperator op(a, tau, steps, set);
            auto& e = errors[j];
            e.resize(steps + 1, 0.0);
            for (std::size_t n = 1; n <= steps; ++n) {
                const double approx = op.apply(std::span<const double>(path.values), n, 0.0);
                e[n] = std::abs(approx - u.rl(a, path.time(n)));
            }
        },
        [&](std::size_t j) { return "cell " + columns[j].label; }, c.name);
    std::ostringstream out;
    out << 't';
    for (const auto& col : columns) out << ',' << col.label << "_error";
    out << '\n';
    for (std::size_t n = 1; n <= steps; ++n) {
        out << format("%.10g", static_cast<double>(n) * tau);
        for (const auto& e : errors) out << ',' << format("%.4e", e[n]);
        out << '\n';
    }
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------

CorrectionSet SigmaRule::build(std::size_t m, double alpha, double alpha1, double alpha2,
                               const CorrectionSet& problem_default) const {
    switch (kind) {
        case Kind::linear: {
            const double s = slope.value_or(alpha);
            if (!std::isfinite(s)) {
                throw InvalidParameter("sigma rule needs alpha or sigma_slope");
            }
            return CorrectionSet::linear(m, s, shift, offset);
        }
        case Kind::list:
            if (list.size() < m) {
                throw InvalidParameter("sigmas lists " + std::to_string(list.size()) +
                                       " exponents, need " + std::to_string(m));
            }
            return CorrectionSet(std::vector<double>(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(m)));
        case Kind::guideline:
            return two_term_sigma_guideline(alpha1, alpha2, m);
        case Kind::problem:
            break;
    }
    if (problem_default.size() < m) {
        throw InvalidParameter("problem provides only " + std::to_string(problem_default.size()) +
                               " exponents, need " + std::to_string(m));
    }
    return problem_default.prefix(m);
}

void StudyConfig::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw InvalidParameter(what);
    };
    need(T > 0.0, "T must be positive");
    for (std::size_t m : ms) {
        need(m <= CorrectionSet::kMaxTerms, "m must not exceed 10");
    }
    for (double a : alphas) {
        need(a > 0.0 && a <= 1.0, "alpha must lie in (0, 1]");
    }
    if (kind == StudyKind::weights) {
        need(!alphas.empty(), "weights study needs 'alpha'");
        return;
    }
    if (kind == StudyKind::diagnostics) {
        need(!alphas.empty(), "diagnostics study needs 'alpha'");
        for (std::size_t m : ms) need(m >= 1, "diagnostics need m >= 1");
        return;
    }
    need(!taus.empty(), "missing key 'tau'");
    for (double t : taus) {
        need(t > 0.0, "step sizes must be positive");
    }
    for (std::size_t i = 1; i < taus.size(); ++i) {
        need(std::abs(taus[i - 1] / taus[i] - 2.0) < 1e-9, "step sizes must halve from row to row");
    }
    need(!methods.empty(), "missing key 'method'");
    if (kind == StudyKind::operator_error) {
        need(taus.size() == 1, "operator study takes a single step size");
        need(!alphas.empty(), "operator study needs 'alpha'");
        return;
    }
    need(!norms.empty(), "missing key 'norm'");
    const bool fode = kind == StudyKind::fode;
    for (const auto& m : methods) {
        const bool ok = m == "wsgl" || m == "l1" || (fode && m == "trapezoidal");
        need(ok, "unsupported method '" + m + "'");
    }
    if (reference.kind == ReferenceSpec::Kind::method) {
        const bool ok = reference.method == "l1" || (fode && reference.method == "trapezoidal");
        need(ok, "unsupported reference method '" + reference.method + "'");
    }
    if (reference.kind != ReferenceSpec::Kind::exact) {
        need(reference.tau > 0.0, "reference step must be positive");
    }
    if ((fode && problem != "cubic") || kind == StudyKind::wave) {
        need(!alphas.empty(), "missing key 'alpha'");
    }
    if (fode && problem == "cubic") {
        need(alpha1 > 0.0 && alpha2 > 0.0, "cubic problem needs alpha1 and alpha2");
    }
}

std::vector<StudyConfig> parse_study_configs(std::istream& in) {
    std::vector<std::pair<std::string, std::map<std::string, std::string>>> sections;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw InvalidParameter("line " + std::to_string(lineno) + ": bad section header");
            }
            sections.emplace_back(trim(line.substr(1, line.size() - 2)), std::map<std::string, std::string>{});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameter("line " + std::to_string(lineno) + ": expected key = value");
        }
        if (sections.empty()) {
            sections.emplace_back("study", std::map<std::string, std::string>{});
        }
        const std::string key = trim(line.substr(0, eq));
        auto& kv = sections.back().second;
        if (kv.count(key)) {
            throw InvalidParameter("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv[key] = trim(line.substr(eq + 1));
    }
    if (sections.empty()) {
        throw InvalidParameter("config defines no study");
    }
    std::vector<StudyConfig> out;
    std::set<std::string> names;
    for (const auto& [name, kv] : sections) {
        if (!names.insert(name).second) {
            throw InvalidParameter("duplicate section [" + name + "]");
        }
        out.push_back(build_config(name, kv));
    }
    return out;
}

std::vector<StudyConfig> load_study_configs(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidParameter("cannot open config '" + path + "'");
    }
    return parse_study_configs(in);
}

double parse_step(const std::string& text, double T) {
    const std::string s = trim(text);
    if (s.rfind("T/", 0) == 0) {
        return T / parse_step(s.substr(2), T);
    }
    if (s.rfind("2^", 0) == 0) {
        const double e = parse_number(s.substr(2), "tau");
        if (e != std::floor(e) || std::abs(e) > 60) {
            throw InvalidParameter("tau: bad exponent in '" + s + "'");
        }
        return std::ldexp(1.0, static_cast<int>(e));
    }
    return parse_number(s, "tau");
}

std::vector<std::optional<double>> observed_order(std::span<const double> errors) {
    std::vector<std::optional<double>> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const double a = errors[i];
        const double b = errors[i + 1];
        if (a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b)) {
            orders.emplace_back(std::log2(a / b));
        } else {
            orders.emplace_back(std::nullopt);
        }
    }
    return orders;
}

const char* norm_name(Norm norm) {
    switch (norm) {
        case Norm::max: return "max";
        case Norm::final: return "final";
        case Norm::avg: return "avg";
    }
    return "?";
}

const ConvergenceColumn& ConvergenceTable::column(const std::string& label, Norm norm) const {
    for (const auto& c : columns) {
        if (c.label == label && c.norm == norm) {
            return c;
        }
    }
    throw InvalidParameter("no column '" + label + "_" + norm_name(norm) + "'");
}

void ConvergenceTable::write_csv(std::ostream& out) const {
    out << "tau";
    for (const auto& c : columns) {
        const std::string base = c.label.empty() ? norm_name(c.norm) : c.label + "_" + norm_name(c.norm);
        out << ',' << base << "_error," << base << "_order";
    }
    out << '\n';
    for (std::size_t r = 0; r < taus.size(); ++r) {
        out << tau_text(taus[r]);
        for (const auto& c : columns) {
            out << ',' << format("%.4e", c.errors[r]) << ',';
            if (r > 0) {
                out << (c.orders[r] ? format("%.2f", *c.orders[r]) : std::string("NA"));
            }
        }
        out << '\n';
    }
}

std::size_t default_workers() {
    if (const char* env = std::getenv("FRACWSGL_WORKERS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v <= 0) {
            throw InvalidParameter(std::string("FRACWSGL_WORKERS must be a positive integer, got '") +
                                   env + "'");
        }
        return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

StudyResult run_study(const StudyConfig& config, std::size_t workers) {
    config.validate();
    if (workers == 0) {
        workers = default_workers();
    }
    StudyResult result;
    result.name = config.name;
    result.kind = config.kind;
    switch (config.kind) {
        case StudyKind::weights:
            result.csv = run_weights(config);
            return result;
        case StudyKind::diagnostics:
            result.csv = run_diagnostics(config, workers);
            return result;
        case StudyKind::operator_error:
            result.csv = run_operator(config, workers);
            return result;
        case StudyKind::fode:
            result.table = run_fode(config, workers);
            break;
        case StudyKind::wave:
            result.table = run_wave(config, workers);
            break;
        case StudyKind::subdiffusion:
            result.table = run_subdiffusion(config, workers);
            break;
    }
    std::ostringstream out;
    result.table.write_csv(out);
    result.csv = out.str();
    return result;
}

}  // namespace fracwsgl
