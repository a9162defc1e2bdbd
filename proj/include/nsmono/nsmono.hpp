#pragma once

#include "nsmono/errors.hpp"
#include "nsmono/field.hpp"
#include "nsmono/fixtures.hpp"
#include "nsmono/functionals.hpp"
#include "nsmono/gauss.hpp"
#include "nsmono/grid.hpp"
#include "nsmono/iteration.hpp"
#include "nsmono/polynomial.hpp"
#include "nsmono/pressure.hpp"
#include "nsmono/projection.hpp"
#include "nsmono/quadrature.hpp"
#include "nsmono/sphere_calculus.hpp"
#include "nsmono/sphere_function.hpp"
#include "nsmono/types.hpp"
