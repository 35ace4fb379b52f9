#pragma once

#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "genfrac/cli/config.hpp"
#include "genfrac/kernel_algebra.hpp"
#include "genfrac/laplace.hpp"
#include "genfrac/operators.hpp"
#include "genfrac/parallel.hpp"
#include "genfrac/spaces.hpp"
#include "genfrac/version.hpp"

namespace genfrac::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_numerical = 2, exit_check_failed = 3 };

enum class Format { csv, json };

struct RunOptions {
    Format format = Format::csv;
    unsigned threads = 1;
    Overrides overrides;
};

struct CommandResult {
    int exit_code = exit_ok;
    /// The CSV or JSON document; empty on failure.
    std::string output;
    /// Human-readable failure description naming the failing operation.
    std::string diagnostic;
};

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i)
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return out.str();
}

/// Digest of the effective config (file plus overrides), keys sorted.
inline std::string config_digest(const json& config) { return sha256_hex(config.dump()); }

namespace detail {

// A library error tagged with the operation that raised it.
class StageError : public std::runtime_error {
public:
    StageError(ErrorKind kind, const std::string& stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

template <class F>
auto in_stage(const std::string& stage, F&& body) {
    try {
        return body();
    } catch (const Error& err) {
        throw StageError(err.kind(), stage, err.what());
    }
}

inline std::string format_number(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline std::string render(const Table& table, Format format, const std::string& digest) {
    if (format == Format::json) {
        json doc{{"version", version}, {"config_sha256", digest}, {"columns", table.columns}, {"rows", table.rows}};
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "# genfrac " << version << "\n# config_sha256 " << digest << "\n";
    for (std::size_t j = 0; j < table.columns.size(); ++j)
        out << (j ? "," : "") << table.columns[j];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? "," : "") << format_number(row[j]);
        out << "\n";
    }
    return out.str();
}

inline std::string render_report(json report, const std::string& digest) {
    report["version"] = version;
    report["config_sha256"] = digest;
    return report.dump(2) + "\n";
}

// Runs a command body and maps failures to exit codes.
template <class Body>
CommandResult guarded(const json& file_config, const RunOptions& opt, Body&& body) {
    CommandResult result;
    try {
        const json config = apply_overrides(file_config, opt.overrides);
        const JobConfig job = in_stage("config", [&] { return parse_job(config); });
        result = body(job, config_digest(config));
    } catch (const StageError& err) {
        result = {is_validation_error(err.kind()) ? exit_validation : exit_numerical, "", err.what()};
    } catch (const Error& err) {
        result = {is_validation_error(err.kind()) ? exit_validation : exit_numerical, "", err.what()};
    } catch (const json::exception& err) {
        result = {exit_validation, "", std::string("config: ") + err.what()};
    }
    return result;
}

inline json residual_array(const std::vector<Complex>& values) {
    json out = json::array();
    for (Complex v : values)
        out.push_back(complex_to_json(v));
    return out;
}

} // namespace detail

/// Series route against definition route on the grid.
inline CommandResult cmd_eval(const json& config, const RunOptions& opt, std::optional<std::string> variant = {}) {
    return detail::guarded(config, opt, [&](const JobConfig& job, const std::string& digest) {
        const OperatorVariant var = parse_variant(variant.value_or(job.text("variant", "integral")));
        const OperatorSpec spec{job.kernel, job.alpha, job.beta, job.chart(), var};
        detail::in_stage("config", [&] {
            spec.validate();
            return 0;
        });
        const TestFunction u = detail::in_stage("config", [&] { return job.function("u"); });

        // Caputo definition route: the kernel-bar integral of the m-th phi-derivative.
        std::optional<OperatorSpec> bar_integral;
        TestFunction du;
        if (var == OperatorVariant::caputo_derivative) {
            const int m = spec.m();
            bar_integral = OperatorSpec{derivative_kernel(spec), static_cast<double>(m) - spec.alpha, spec.beta,
                                        spec.chart};
            du = TestFunction::analytic([u, chart = spec.chart, m](double t) { return u.phi_derivative(chart, m, t); });
        }

        std::vector<Complex> series(job.grid.size()), quad(job.grid.size());
        parallel_for(job.grid.size(), opt.threads, [&](std::size_t i) {
            const double x = job.grid[i];
            const std::string at = " at x = " + detail::format_number(x);
            switch (var) {
            case OperatorVariant::integral:
                series[i] = detail::in_stage("gfi_series" + at, [&] { return gfi_series(spec, u, x, job.trunc); });
                quad[i] = detail::in_stage("gfi_quadrature" + at, [&] { return gfi_quadrature(spec, u, x, job.trunc); });
                break;
            case OperatorVariant::rl_derivative:
                series[i] = detail::in_stage("gfd_rl" + at, [&] { return gfd_rl(spec, u, x, job.trunc); });
                quad[i] = detail::in_stage("gfd_rl_quadrature" + at,
                                           [&] { return gfd_rl_quadrature(spec, u, x, job.trunc); });
                break;
            case OperatorVariant::caputo_derivative:
                series[i] = detail::in_stage("gfd_caputo" + at, [&] { return gfd_caputo(spec, u, x, job.trunc); });
                quad[i] = detail::in_stage("caputo quadrature" + at,
                                           [&] { return gfi_quadrature(*bar_integral, du, x, job.trunc); });
                break;
            }
        });

        detail::Table table{{"x", "re_series", "im_series", "re_quadrature", "im_quadrature", "abs_diff"}, {}};
        for (std::size_t i = 0; i < job.grid.size(); ++i)
            table.rows.push_back({job.grid[i], series[i].real(), series[i].imag(), quad[i].real(), quad[i].imag(),
                                  std::abs(series[i] - quad[i])});
        return CommandResult{exit_ok, detail::render(table, opt.format, digest), ""};
    });
}

/// Property and audit suites; exit 3 when the property does not hold.
inline CommandResult cmd_check(const json& config, const RunOptions& opt, std::optional<std::string> suite_flag = {}) {
    return detail::guarded(config, opt, [&](const JobConfig& job, const std::string& digest) {
        const std::string suite = suite_flag.value_or(job.text("suite", "semigroup"));
        json report{{"suite", suite}};
        bool pass = false;
        if (suite == "semigroup") {
            const Complex gamma = job.complex_number("gamma", 0.5);
            const auto k_max = static_cast<std::size_t>(job.number("k_max", 20));
            const double tol = job.number("tolerance", 1e-10);
            const SemigroupReport r = detail::in_stage("check_semigroup_one_param", [&] {
                return check_semigroup_one_param(job.kernel, job.alpha, gamma, job.beta, k_max, tol);
            });
            report["residuals"] = detail::residual_array(r.residuals);
            report["max_residual"] = r.max_residual();
            report["tolerance"] = tol;
            pass = r.passed;
        } else if (suite == "commutativity") {
            const OperatorSpec first{job.kernel, job.alpha, job.beta, job.chart()};
            const OperatorSpec second{job.kernel, job.complex_number("gamma", 0.7), job.complex_number("delta", 0.5),
                                      job.chart()};
            const TestFunction u = job.raw.contains("u") ? job.function("u") : TestFunction::constant(1.0);
            const double tol = job.number("tolerance", 1e-7);
            const double dev = detail::in_stage("commutativity_check", [&] {
                return commutativity_check(first, second, u, job.grid, job.trunc);
            });
            report["max_deviation"] = dev;
            report["tolerance"] = tol;
            pass = dev <= tol;
        } else if (suite == "mfold") {
            const int m = static_cast<int>(job.number("m", 1));
            const TestFunction u = job.raw.contains("u") ? job.function("u") : TestFunction::constant(1.0);
            const double tol = job.number("tolerance", 1e-7);
            const auto [dev_b, dev_c] = detail::in_stage("m_fold_identity_check", [&] {
                return m_fold_identity_check(job.kernel, job.alpha, job.beta, m, job.chart(), u, job.grid, job.trunc);
            });
            report["deviation_B"] = dev_b;
            report["deviation_C"] = dev_c;
            report["tolerance"] = tol;
            pass = dev_b <= tol && dev_c <= tol;
        } else if (suite == "bounds" || suite == "derivative_bounds") {
            const int trials = static_cast<int>(job.number("trials", 20));
            const AuditReport r = suite == "bounds"
                                      ? detail::in_stage("boundedness_audit", [&] {
                                            return boundedness_audit(job.kernel, job.alpha, job.beta, job.chart(),
                                                                     job.number("p", 1.0), trials, job.seed, opt.threads);
                                        })
                                      : detail::in_stage("derivative_audit", [&] {
                                            return derivative_audit(job.kernel, job.alpha, job.beta, job.chart(), trials,
                                                                    job.seed, opt.threads);
                                        });
            report["ratios"] = r.ratios;
            report["max_ratio"] = r.max_ratio;
            report["bound"] = r.bound;
            report["trials"] = r.trials;
            report["seed"] = r.seed;
            pass = r.pass;
        } else {
            fail(ErrorKind::invalid_params,
                 "unknown suite '" + suite + "' (semigroup, commutativity, mfold, bounds, derivative_bounds)");
        }
        report["pass"] = pass;
        return CommandResult{pass ? exit_ok : exit_check_failed, detail::render_report(report, digest),
                             pass ? "" : "check '" + suite + "' failed"};
    });
}

/// Solves A-I u + c u = v on the grid by transform inversion.
inline CommandResult cmd_solve(const json& config, const RunOptions& opt) {
    return detail::guarded(config, opt, [&](const JobConfig& job, const std::string& digest) {
        require(job.raw.contains("c"), ErrorKind::invalid_params, "solve needs the coefficient 'c'");
        const IntegralEquation eq{job.kernel, job.alpha, job.beta, job.half_line_chart(), job.number("c", 0.0),
                                  job.function("v")};
        detail::in_stage("config", [&] {
            eq.validate();
            return 0;
        });
        SolveOptions so;
        so.method = parse_method(job.text("method", "talbot"));
        so.trunc = job.trunc;
        so.threads = opt.threads;
        const IntegralSolution sol =
            detail::in_stage("solve_integral_equation", [&] { return solve_integral_equation(eq, job.grid, so); });
        detail::Table table{{"x", "re_u", "im_u", "residual"}, {}};
        for (std::size_t i = 0; i < sol.x.size(); ++i)
            table.rows.push_back({sol.x[i], sol.u[i].real(), sol.u[i].imag(), sol.residual[i]});
        const double bound = job.number("max_residual", 1e-4);
        const bool pass = sol.max_residual <= bound;
        return CommandResult{pass ? exit_ok : exit_check_failed, detail::render(table, opt.format, digest),
                             pass ? "" : "max residual " + detail::format_number(sol.max_residual) + " exceeds " +
                                             detail::format_number(bound)};
    });
}

/// Weighted norms of u: lp, c_alpha or c_m_alpha.
inline CommandResult cmd_norm(const json& config, const RunOptions& opt) {
    return detail::guarded(config, opt, [&](const JobConfig& job, const std::string& digest) {
        const std::string kind = job.text("norm", "lp");
        NormSpec spec{job.number("p", 1.0), job.chart(), job.complex_number("alpha_weight", 0.0),
                      static_cast<int>(job.number("m", 0))};
        const TestFunction u = job.function("u");
        double value = 0.0;
        if (kind == "lp")
            value = detail::in_stage("lp_phi_norm", [&] { return lp_phi_norm(u, spec); });
        else if (kind == "c_alpha")
            value = detail::in_stage("c_alpha_phi_norm", [&] { return c_alpha_phi_norm(u, spec); });
        else if (kind == "c_m_alpha")
            value = detail::in_stage("c_m_alpha_phi_norm", [&] { return c_m_alpha_phi_norm(u, spec); });
        else
            fail(ErrorKind::invalid_params, "unknown norm '" + kind + "' (lp, c_alpha, c_m_alpha)");
        if (opt.format == Format::json)
            return CommandResult{exit_ok, detail::render_report(json{{"norm", kind}, {"value", value}}, digest), ""};
        std::ostringstream out;
        out << "# genfrac " << version << "\n# config_sha256 " << digest << "\nnorm,value\n"
            << kind << "," << detail::format_number(value) << "\n";
        return CommandResult{exit_ok, out.str(), ""};
    });
}

} // namespace genfrac::cli
