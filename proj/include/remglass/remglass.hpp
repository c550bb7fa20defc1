#pragma once

#include "remglass/cavity_sim.hpp"
#include "remglass/parisi.hpp"
#include "remglass/phi_model.hpp"
#include "remglass/philox.hpp"
#include "remglass/quadrature.hpp"
#include "remglass/rem_sim.hpp"
#include "remglass/ruelle.hpp"
#include "remglass/stats.hpp"
#include "remglass/tilt.hpp"
#include "remglass/version.hpp"
