#pragma once

// Umbrella header for the LTS test & evaluation toolkit.

#include "ltseval/alignment.hpp"
#include "ltseval/angles.hpp"
#include "ltseval/errors.hpp"
#include "ltseval/interpolation.hpp"
#include "ltseval/io.hpp"
#include "ltseval/metrics.hpp"
#include "ltseval/path.hpp"
#include "ltseval/pose.hpp"
#include "ltseval/requirements.hpp"
#include "ltseval/rng.hpp"
#include "ltseval/scenario.hpp"
#include "ltseval/testbed.hpp"
#include "ltseval/time.hpp"
#include "ltseval/trajectory.hpp"
#include "ltseval/visits.hpp"
