#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace genfrac {

using Complex = std::complex<double>;

enum class ErrorKind {
    // contract and configuration problems
    precondition,
    invalid_params,
    unknown_preset,
    domain_mismatch,
    order_not_positive,
    integer_order,
    invalid_exponent,
    out_of_disc,
    missing_derivatives,
    missing_initial_values,
    // numerical failures
    gamma_pole,
    zero_leading_coefficient,
    no_convergence,
    quadrature_failure,
    divergent_norm,
    unbounded,
    abscissa_violation,
    method_failure,
    denominator_zero,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::precondition: return "Precondition";
    case ErrorKind::invalid_params: return "InvalidParams";
    case ErrorKind::unknown_preset: return "UnknownPreset";
    case ErrorKind::domain_mismatch: return "DomainMismatch";
    case ErrorKind::order_not_positive: return "OrderNotPositive";
    case ErrorKind::integer_order: return "IntegerOrder";
    case ErrorKind::invalid_exponent: return "InvalidExponent";
    case ErrorKind::out_of_disc: return "OutOfDisc";
    case ErrorKind::missing_derivatives: return "MissingDerivatives";
    case ErrorKind::missing_initial_values: return "MissingInitialValues";
    case ErrorKind::gamma_pole: return "GammaPole";
    case ErrorKind::zero_leading_coefficient: return "ZeroLeadingCoefficient";
    case ErrorKind::no_convergence: return "NoConvergence";
    case ErrorKind::quadrature_failure: return "QuadratureFailure";
    case ErrorKind::divergent_norm: return "DivergentNorm";
    case ErrorKind::unbounded: return "Unbounded";
    case ErrorKind::abscissa_violation: return "AbscissaViolation";
    case ErrorKind::method_failure: return "MethodFailure";
    case ErrorKind::denominator_zero: return "DenominatorZero";
    }
    return "Unknown";
}

/// True for errors caused by the caller's inputs rather than by the numerics.
inline bool is_validation_error(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::precondition:
    case ErrorKind::invalid_params:
    case ErrorKind::unknown_preset:
    case ErrorKind::domain_mismatch:
    case ErrorKind::order_not_positive:
    case ErrorKind::integer_order:
    case ErrorKind::invalid_exponent:
    case ErrorKind::out_of_disc:
    case ErrorKind::missing_derivatives:
    case ErrorKind::missing_initial_values:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition)
        fail(kind, what);
}

} // namespace genfrac
