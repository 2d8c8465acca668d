#pragma once

#include "appell.hpp"
#include "chebyshev.hpp"
#include "coeffexpr.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "phasefn.hpp"
#include "reference.hpp"
#include "riccati.hpp"
#include "solve_api.hpp"
