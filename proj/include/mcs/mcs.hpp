#pragma once

// Umbrella header.

#include "mcs/bounds.hpp"
#include "mcs/container.hpp"
#include "mcs/error.hpp"
#include "mcs/geometry.hpp"
#include "mcs/gmra.hpp"
#include "mcs/harness.hpp"
#include "mcs/kdtree.hpp"
#include "mcs/measurement.hpp"
#include "mcs/recovery.hpp"
#include "mcs/rng.hpp"
#include "mcs/stats.hpp"
#include "mcs/types.hpp"
