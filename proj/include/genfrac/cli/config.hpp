#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "genfrac/chart.hpp"
#include "genfrac/errors.hpp"
#include "genfrac/kernel.hpp"
#include "genfrac/laplace.hpp"
#include "genfrac/operators.hpp"
#include "genfrac/test_function.hpp"

namespace genfrac::cli {

using json = nlohmann::json;

/// Command-line values that replace the matching config entries.
struct Overrides {
    std::optional<std::string> alpha;
    std::optional<std::string> beta;
    std::optional<std::string> chart;
    std::optional<std::string> kernel;
    std::optional<std::uint64_t> seed;
};

/// Complex from a number or a [re, im] pair.
inline Complex complex_from_json(const json& j, const std::string& field) {
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    fail(ErrorKind::invalid_params, "'" + field + "' must be a number or a [re, im] pair");
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

/// "0.5" or "0.5,0.1" as a [re, im] pair.
inline json parse_complex_flag(const std::string& text, const std::string& flag) {
    std::istringstream in(text);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(in >> re))
        fail(ErrorKind::invalid_params, "--" + flag + " expects 're' or 're,im'");
    if (in >> comma) {
        if (comma != ',' || !(in >> im))
            fail(ErrorKind::invalid_params, "--" + flag + " expects 're' or 're,im'");
    }
    return json::array({re, im});
}

/// Applies flag overrides; flags win over file values.
inline json apply_overrides(json config, const Overrides& o) {
    if (!config.is_object())
        fail(ErrorKind::invalid_params, "config must be a JSON object");
    if (o.alpha)
        config["alpha"] = parse_complex_flag(*o.alpha, "alpha");
    if (o.beta)
        config["beta"] = parse_complex_flag(*o.beta, "beta");
    if (o.chart)
        config["chart"] = json{{"preset", *o.chart}};
    if (o.kernel)
        config["kernel"] = json{{"preset", *o.kernel}};
    if (o.seed)
        config["seed"] = *o.seed;
    return config;
}

inline json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::invalid_params, "cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        fail(ErrorKind::invalid_params, "config file '" + path + "' is not valid JSON: " + err.what());
    }
}

namespace detail {

inline std::map<std::string, double> params_of(const json& node) {
    std::map<std::string, double> out;
    if (!node.contains("params"))
        return out;
    const json& p = node.at("params");
    if (!p.is_object())
        fail(ErrorKind::invalid_params, "'params' must be an object of numbers");
    for (const auto& [key, value] : p.items()) {
        if (!value.is_number())
            fail(ErrorKind::invalid_params, "parameter '" + key + "' must be a number");
        out[key] = value.get<double>();
    }
    return out;
}

template <class T>
T get_or(const json& config, const std::string& key, T fallback) {
    if (!config.contains(key))
        return fallback;
    try {
        return config.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorKind::invalid_params, "config field '" + key + "' has the wrong type");
    }
}

inline TestFunction sampled_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::invalid_params, "cannot open sample file '" + path + "'");
    std::vector<double> xs;
    std::vector<Complex> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0])))
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x = 0.0, re = 0.0, im = 0.0;
        if (!(row >> x >> re))
            fail(ErrorKind::invalid_params, "sample file row '" + line + "' needs x and re(u)");
        row >> im;
        xs.push_back(x);
        values.emplace_back(re, im);
    }
    return TestFunction::sampled(std::move(xs), std::move(values));
}

} // namespace detail

/// Validated job description shared by all subcommands.
struct JobConfig {
    json raw;
    AnalyticKernel kernel;
    Complex alpha = 1.0;
    Complex beta = 1.0;
    std::string chart_name = "identity";
    std::map<std::string, double> chart_params;
    double a = 0.0;
    double b = 1.0;
    std::vector<double> grid;
    TruncationPolicy trunc;
    std::uint64_t seed = 20240601;

    PhiChart chart() const { return make_phi_preset(chart_name, chart_params, a, b); }
    /// The same chart on [a, infinity), for transforms.
    PhiChart half_line_chart() const { return make_phi_preset(chart_name, chart_params, a, INFINITY); }

    /// The function stored under `key` ("u" or "v"): constant, monomial or csv samples.
    TestFunction function(const std::string& key) const {
        if (!raw.contains(key))
            fail(ErrorKind::invalid_params, "config needs a '" + key + "' function");
        const json& f = raw.at(key);
        if (f.is_string() && f.get<std::string>() == "zero")
            return TestFunction::zero();
        if (!f.is_object())
            fail(ErrorKind::invalid_params, "'" + key + "' must be an object or \"zero\"");
        if (f.contains("constant"))
            return TestFunction::constant(complex_from_json(f.at("constant"), key + ".constant"));
        if (f.contains("monomial")) {
            const json& m = f.at("monomial");
            const Complex p = complex_from_json(m.value("p", json(0.0)), key + ".monomial.p");
            const Complex coeff = complex_from_json(m.value("coeff", json(1.0)), key + ".monomial.coeff");
            return TestFunction::phi_monomial(half_line_chart(), p, coeff);
        }
        if (f.contains("csv"))
            return detail::sampled_from_csv(f.at("csv").get<std::string>());
        fail(ErrorKind::invalid_params, "'" + key + "' needs one of constant, monomial, csv");
    }

    double number(const std::string& key, double fallback) const { return detail::get_or(raw, key, fallback); }
    Complex complex_number(const std::string& key, Complex fallback) const {
        return raw.contains(key) ? complex_from_json(raw.at(key), key) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        return detail::get_or(raw, key, fallback);
    }
};

inline AnalyticKernel kernel_from_json(const json& node) {
    if (!node.is_object())
        fail(ErrorKind::invalid_params, "'kernel' must be an object");
    if (node.contains("coefficients")) {
        std::vector<Complex> coeffs;
        for (const json& c : node.at("coefficients"))
            coeffs.push_back(complex_from_json(c, "kernel.coefficients"));
        return make_list_kernel(std::move(coeffs), detail::get_or(node, "radius", infinite_radius));
    }
    return make_kernel_preset(detail::get_or<std::string>(node, "preset", "rl"), detail::params_of(node));
}

/// Parses and validates a config (after overrides).
inline JobConfig parse_job(const json& config) {
    JobConfig job;
    job.raw = config;
    job.kernel = kernel_from_json(config.value("kernel", json{{"preset", "rl"}}));
    job.alpha = job.complex_number("alpha", 1.0);
    job.beta = job.complex_number("beta", 1.0);
    const json chart = config.value("chart", json{{"preset", "identity"}});
    if (!chart.is_object())
        fail(ErrorKind::invalid_params, "'chart' must be an object");
    job.chart_name = detail::get_or<std::string>(chart, "preset", "identity");
    job.chart_params = detail::params_of(chart);
    if (config.contains("interval")) {
        const json& iv = config.at("interval");
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
            fail(ErrorKind::invalid_params, "'interval' must be [a, b]");
        job.a = iv[0].get<double>();
        job.b = iv[1].get<double>();
    }
    require(job.a < job.b && std::isfinite(job.b), ErrorKind::domain_mismatch, "interval needs a < b < infinity");
    validate_chart(job.chart());

    const json grid = config.value("grid", json(8));
    if (grid.is_number_integer()) {
        const int n = grid.get<int>();
        require(n >= 1, ErrorKind::invalid_params, "grid count must be positive");
        for (int i = 1; i <= n; ++i)
            job.grid.push_back(job.a + (job.b - job.a) * i / n);
    } else if (grid.is_array()) {
        for (const json& x : grid) {
            if (!x.is_number())
                fail(ErrorKind::invalid_params, "grid entries must be numbers");
            const double v = x.get<double>();
            require(v >= job.a && v <= job.b, ErrorKind::domain_mismatch, "grid point outside the interval");
            job.grid.push_back(v);
        }
        require(!job.grid.empty(), ErrorKind::invalid_params, "grid list is empty");
    } else {
        fail(ErrorKind::invalid_params, "'grid' must be a count or a list of points");
    }

    if (config.contains("truncation")) {
        const json& t = config.at("truncation");
        job.trunc.max_terms = detail::get_or<std::size_t>(t, "max_terms", job.trunc.max_terms);
        job.trunc.tail_tol = detail::get_or(t, "tail_tol", job.trunc.tail_tol);
        require(job.trunc.max_terms >= 1 && job.trunc.tail_tol > 0.0, ErrorKind::invalid_params,
                "truncation needs max_terms >= 1 and tail_tol > 0");
    }
    job.seed = detail::get_or<std::uint64_t>(config, "seed", job.seed);
    return job;
}

inline OperatorVariant parse_variant(const std::string& name) {
    if (name == "integral")
        return OperatorVariant::integral;
    if (name == "rl_derivative" || name == "rl")
        return OperatorVariant::rl_derivative;
    if (name == "caputo_derivative" || name == "caputo")
        return OperatorVariant::caputo_derivative;
    fail(ErrorKind::invalid_params, "unknown variant '" + name + "' (integral, rl_derivative, caputo_derivative)");
}

inline InversionMethod parse_method(const std::string& name) {
    if (name == "talbot")
        return InversionMethod::talbot;
    if (name == "gaver_stehfest")
        return InversionMethod::gaver_stehfest;
    if (name == "cross_check")
        return InversionMethod::cross_check;
    fail(ErrorKind::invalid_params, "unknown inversion method '" + name + "' (talbot, gaver_stehfest, cross_check)");
}

} // namespace genfrac::cli
