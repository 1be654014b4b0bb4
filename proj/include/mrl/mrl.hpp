#pragma once

#include "mrl/cli.hpp"
#include "mrl/config.hpp"
#include "mrl/csv.hpp"
#include "mrl/diagnostics.hpp"
#include "mrl/donsker.hpp"
#include "mrl/errors.hpp"
#include "mrl/exact.hpp"
#include "mrl/grid.hpp"
#include "mrl/hurst.hpp"
#include "mrl/kernel.hpp"
#include "mrl/noise.hpp"
#include "mrl/parallel.hpp"
#include "mrl/quadrature.hpp"
#include "mrl/report.hpp"
#include "mrl/rng.hpp"
#include "mrl/stats.hpp"
