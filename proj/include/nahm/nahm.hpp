#pragma once

#include "nahm/errors.hpp"
#include "nahm/quadrature.hpp"
#include "nahm/specfun.hpp"
#include "nahm/polynomial.hpp"
#include "nahm/classical.hpp"
#include "nahm/hermite.hpp"
#include "nahm/ode.hpp"
#include "nahm/density.hpp"
#include "nahm/spectral.hpp"
#include "nahm/zeta.hpp"
#include "nahm/riemann.hpp"
