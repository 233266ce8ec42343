#pragma once

#include "lightcone/cone_curves.hpp"
#include "lightcone/error.hpp"
#include "lightcone/frenet.hpp"
#include "lightcone/interpolation.hpp"
#include "lightcone/lorentz.hpp"
#include "lightcone/profile.hpp"
#include "lightcone/slant.hpp"
#include "lightcone/scenario.hpp"
#include "lightcone/runner.hpp"
