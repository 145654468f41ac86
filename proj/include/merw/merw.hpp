#pragma once

#include "merw/arith.hpp"
#include "merw/config.hpp"
#include "merw/error.hpp"
#include "merw/io.hpp"
#include "merw/measurement.hpp"
#include "merw/montecarlo.hpp"
#include "merw/path_ensemble.hpp"
#include "merw/rng.hpp"
#include "merw/statespace.hpp"
