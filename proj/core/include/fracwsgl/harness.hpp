#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracwsgl/corrections.hpp"
#include "fracwsgl/errors.hpp"

namespace fracwsgl {

enum class StudyKind { weights, diagnostics, operator_error, fode, wave, subdiffusion };

enum class Norm { max, final, avg };

/// How σ_1..σ_m are chosen for a column with order α.
struct SigmaRule {
    enum class Kind {
        linear,     // σ_k = (k + shift) · slope + offset, slope defaulting to α
        list,       // explicit exponents
        guideline,  // α_1 + (α_1 - α_2)(k - 1)
        problem,    // the exponents the problem is known to have
    };
    Kind kind = Kind::problem;
    std::optional<double> slope;
    double shift = 0.0;
    double offset = 0.0;
    std::vector<double> list;

    CorrectionSet build(std::size_t m, double alpha, double alpha1, double alpha2,
                        const CorrectionSet& problem_default) const;
};

struct ReferenceSpec {
    enum class Kind { exact, self, method };
    Kind kind = Kind::exact;
    std::string method;
    double tau = 0.0;
};

/// One study. In the config file each section `[name]` is a study and holds
/// `key = value` lines; `#` starts a comment. Step sizes accept `2^-8`,
/// `T/2^8` or plain numbers, lists are comma separated.
///
/// Keys: kind, problem, method (list), alpha (list), alpha1, alpha2, lambda,
/// T, tau (list), m (list), sigma_rule, sigma_slope, sigma_shift,
/// sigma_offset, sigmas, norm (list), reference, reference_cache,
/// wave_corrections, drop_far_field, source_rule, breakpoints, degrees, K,
/// output.
struct StudyConfig {
    std::string name = "study";
    StudyKind kind = StudyKind::fode;
    std::string problem;
    std::vector<std::string> methods{"wsgl"};
    std::vector<double> alphas;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double lambda = 1.0;
    double T = 1.0;
    std::vector<double> taus;
    std::vector<std::size_t> ms{0};
    SigmaRule sigma;
    std::vector<Norm> norms{Norm::max};
    ReferenceSpec reference;
    std::string reference_cache;
    /// Wave only: m applies to the fractional term alone ("m3") or to all
    /// three correction sums ("all").
    bool wave_all_corrections = false;
    bool drop_far_field = false;
    bool midpoint_source = false;
    std::vector<double> breakpoints;
    std::vector<std::size_t> degrees;
    std::size_t K = 20;
    std::string output;

    /// Throws InvalidParameter with the offending key.
    void validate() const;
};

std::vector<StudyConfig> parse_study_configs(std::istream& in);
std::vector<StudyConfig> load_study_configs(const std::string& path);

/// `2^-k`, `T/2^k`, `T/n` or a decimal number.
double parse_step(const std::string& text, double T);

/// log₂(e_i / e_{i+1}); empty where either error is not positive.
std::vector<std::optional<double>> observed_order(std::span<const double> errors);

struct ConvergenceColumn {
    std::string label;
    Norm norm = Norm::max;
    std::vector<double> errors;
    /// Aligned with the rows; the first entry is always empty.
    std::vector<std::optional<double>> orders;
};

struct ConvergenceTable {
    std::vector<double> taus;
    std::vector<ConvergenceColumn> columns;

    const ConvergenceColumn& column(const std::string& label, Norm norm) const;
    /// Header `tau,<label>_<norm>_error,<label>_<norm>_order,...`, errors with
    /// five significant digits, orders with two decimals (NA if undefined).
    void write_csv(std::ostream& out) const;
};

const char* norm_name(Norm norm);

struct StudyResult {
    std::string name;
    StudyKind kind = StudyKind::fode;
    /// Empty for weights, diagnostics and operator studies.
    ConvergenceTable table;
    std::string csv;
};

/// FRACWSGL_WORKERS if set and positive, else the hardware concurrency.
std::size_t default_workers();

/// Failure of one study cell; what() names the study and the cell.
class StudyError : public Error {
public:
    using Error::Error;
};

/// Runs every cell of the study on `workers` threads (0 = default_workers())
/// and gathers results in config order, so the CSV only depends on the config.
StudyResult run_study(const StudyConfig& config, std::size_t workers = 0);

}  // namespace fracwsgl
