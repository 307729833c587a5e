#pragma once

// Umbrella header: resistance-to-frequency physics, wafer data model,
// dose response, collision detection, tune planning, simulation, reports.

#include "jjtune/constants.hpp"
#include "jjtune/transmon.hpp"
#include "jjtune/junction.hpp"
#include "jjtune/stats.hpp"
#include "jjtune/wafer_io.hpp"
#include "jjtune/dose.hpp"
#include "jjtune/layout.hpp"
#include "jjtune/collisions.hpp"
#include "jjtune/planner.hpp"
#include "jjtune/simulate.hpp"
#include "jjtune/reports.hpp"
