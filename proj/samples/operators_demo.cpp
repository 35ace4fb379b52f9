// Evaluates a tempered integral on the log chart both ways, then solves
// I u + u = 1 by transform inversion and prints the first few samples.

#include <cmath>
#include <cstdio>

#include "genfrac/genfrac.hpp"

int main() {
    using namespace genfrac;

    const PhiChart log_chart = make_phi_preset("log", {}, 1.0, 2.0);
    const OperatorSpec spec{make_tempered_kernel(1.0), 0.5, 1.0, log_chart};
    const TestFunction u = TestFunction::phi_monomial(log_chart, 1.0);
    std::printf("%6s %22s %22s\n", "x", "series", "quadrature");
    for (double x : {1.25, 1.5, 1.75, 2.0})
        std::printf("%6.2f %22.15f %22.15f\n", x, gfi_series(spec, u, x).real(), gfi_quadrature(spec, u, x).real());

    const IntegralEquation eq{make_rl_kernel(), 1.0, 1.0, make_phi_preset("log1p", {}, 0.0, INFINITY), 1.0,
                              TestFunction::constant(1.0)};
    const IntegralSolution sol = solve_integral_equation(eq, {0.5, 1.0, 2.0});
    std::printf("\n%6s %22s %22s\n", "x", "u(x)", "1/(1+x)");
    for (std::size_t i = 0; i < sol.x.size(); ++i)
        std::printf("%6.2f %22.15f %22.15f\n", sol.x[i], sol.u[i].real(), 1.0 / (1.0 + sol.x[i]));
    std::printf("max residual %.3e\n", sol.max_residual);
}
