#pragma once

#include "genfrac/chart.hpp"
#include "genfrac/complex_gamma.hpp"
#include "genfrac/errors.hpp"
#include "genfrac/kernel.hpp"
#include "genfrac/kernel_algebra.hpp"
#include "genfrac/laplace.hpp"
#include "genfrac/operators.hpp"
#include "genfrac/parallel.hpp"
#include "genfrac/phi_calculus.hpp"
#include "genfrac/quadrature.hpp"
#include "genfrac/spaces.hpp"
#include "genfrac/test_function.hpp"
#include "genfrac/version.hpp"
