#pragma once

#include "vvflux/diagnostics.hpp"
#include "vvflux/errors.hpp"
#include "vvflux/flux.hpp"
#include "vvflux/geometry.hpp"
#include "vvflux/grid.hpp"
#include "vvflux/harness.hpp"
#include "vvflux/mollifier.hpp"
#include "vvflux/solver.hpp"
#include "vvflux/version.hpp"
