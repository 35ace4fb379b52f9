#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "genfrac/errors.hpp"

namespace genfrac {

/// Increasing change of variable phi on [a, b]; b may be +infinity.
struct PhiChart {
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
    std::function<double(double)> inv;
    double a = 0.0;
    double b = 1.0;
    std::string name;
    /// Preset name plus parameters; equal keys mean identical phi.
    std::string key;

    double phi_a() const { return phi(a); }
    double phi_b() const { return phi(b); }
    /// phi(b) - phi(a).
    double length() const { return phi(b) - phi(a); }
    bool contains(double x) const { return x >= a && x <= b; }
    bool unbounded() const { return std::isinf(b); }

    /// Point x with phi(x) - phi(a) = w.
    double at_offset(double w) const { return inv(phi(a) + w); }
};

/// Throws InvalidParams when phi is not increasing or inv does not invert phi
/// on `samples` points of the (truncated) domain.
inline void validate_chart(const PhiChart& chart, int samples = 1000) {
    require(static_cast<bool>(chart.phi) && static_cast<bool>(chart.dphi) && static_cast<bool>(chart.inv),
            ErrorKind::invalid_params, "chart is missing phi, dphi or inv");
    require(chart.a < chart.b, ErrorKind::domain_mismatch, "chart domain needs a < b");
    const double hi = chart.unbounded() ? chart.a + 50.0 : chart.b;
    double prev = chart.phi(chart.a);
    for (int i = 1; i <= samples; ++i) {
        const double x = chart.a + (hi - chart.a) * static_cast<double>(i) / samples;
        const double y = chart.phi(x);
        require(std::isfinite(y) && y > prev, ErrorKind::invalid_params,
                "chart " + chart.name + " is not increasing near x = " + std::to_string(x));
        if (i < samples)
            require(chart.dphi(x) > 0.0, ErrorKind::invalid_params,
                    "chart " + chart.name + " has phi' <= 0 at x = " + std::to_string(x));
        const double back = chart.inv(y);
        require(std::abs(back - x) <= 1e-12 * std::max(1.0, std::abs(x)), ErrorKind::invalid_params,
                "chart " + chart.name + " inverse is inconsistent at x = " + std::to_string(x));
        prev = y;
    }
}

namespace detail {

inline double chart_param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

inline std::string chart_key(const std::string& name, const std::map<std::string, double>& params) {
    std::ostringstream out;
    out.precision(17);
    out << name;
    for (const auto& [k, v] : params)
        out << ';' << k << '=' << v;
    return out.str();
}

} // namespace detail

/// Chart presets: identity, affine (scale, shift), log, log1p, power (sigma),
/// exp (lambda; phi = e^{lambda x} - 1).
inline PhiChart make_phi_preset(const std::string& name, const std::map<std::string, double>& params, double a,
                                double b) {
    require(a < b, ErrorKind::domain_mismatch, "chart domain needs a < b");
    PhiChart c;
    c.a = a;
    c.b = b;
    c.name = name;
    if (name == "identity") {
        c.phi = [](double x) { return x; };
        c.dphi = [](double) { return 1.0; };
        c.inv = [](double y) { return y; };
        c.key = "identity";
    } else if (name == "affine") {
        const double k = detail::chart_param(params, "scale", 1.0);
        const double s = detail::chart_param(params, "shift", 0.0);
        require(k > 0.0, ErrorKind::invalid_params, "affine chart needs scale > 0");
        c.phi = [k, s](double x) { return k * x + s; };
        c.dphi = [k](double) { return k; };
        c.inv = [k, s](double y) { return (y - s) / k; };
        c.key = detail::chart_key(name, {{"scale", k}, {"shift", s}});
    } else if (name == "log") {
        require(a > 0.0, ErrorKind::invalid_params, "log chart needs a > 0");
        c.phi = [](double x) { return std::log(x); };
        c.dphi = [](double x) { return 1.0 / x; };
        c.inv = [](double y) { return std::exp(y); };
        c.key = "log";
    } else if (name == "log1p") {
        require(a > -1.0, ErrorKind::invalid_params, "log1p chart needs a > -1");
        c.phi = [](double x) { return std::log1p(x); };
        c.dphi = [](double x) { return 1.0 / (1.0 + x); };
        c.inv = [](double y) { return std::expm1(y); };
        c.key = "log1p";
    } else if (name == "power") {
        const double sigma = detail::chart_param(params, "sigma", 1.0);
        require(sigma > 0.0, ErrorKind::invalid_params, "power chart needs sigma > 0");
        require(a >= 0.0, ErrorKind::invalid_params, "power chart needs a >= 0");
        c.phi = [sigma](double x) { return std::pow(x, sigma); };
        c.dphi = [sigma](double x) { return sigma * std::pow(x, sigma - 1.0); };
        c.inv = [sigma](double y) { return std::pow(y, 1.0 / sigma); };
        c.key = detail::chart_key(name, {{"sigma", sigma}});
    } else if (name == "exp") {
        const double lambda = detail::chart_param(params, "lambda", 1.0);
        require(lambda > 0.0, ErrorKind::invalid_params, "exp chart needs lambda > 0");
        c.phi = [lambda](double x) { return std::expm1(lambda * x); };
        c.dphi = [lambda](double x) { return lambda * std::exp(lambda * x); };
        c.inv = [lambda](double y) { return std::log1p(y) / lambda; };
        c.key = detail::chart_key(name, {{"lambda", lambda}});
    } else {
        fail(ErrorKind::unknown_preset, "unknown chart preset '" + name + "'");
    }
    return c;
}

inline PhiChart make_identity_chart(double a, double b) { return make_phi_preset("identity", {}, a, b); }

} // namespace genfrac
