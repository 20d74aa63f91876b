#pragma once

#include "bhl/error.hpp"
#include "bhl/parallel.hpp"
#include "bhl/quadrature.hpp"
#include "bhl/interpolation.hpp"
#include "bhl/weights.hpp"
#include "bhl/hankel.hpp"
#include "bhl/band_eigen.hpp"
#include "bhl/spectrum.hpp"
#include "bhl/rearrangement.hpp"
#include "bhl/asymptotics.hpp"
#include "bhl/config.hpp"
#include "bhl/csv.hpp"
#include "bhl/acceptance.hpp"
#include "bhl/commands.hpp"
