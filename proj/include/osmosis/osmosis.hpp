#pragma once

#include "osmosis/analysis.hpp"
#include "osmosis/diffusivity.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/error.hpp"
#include "osmosis/grid.hpp"
#include "osmosis/pipeline.hpp"
#include "osmosis/solver.hpp"
#include "osmosis/spectrum.hpp"
#include "osmosis/stencil.hpp"
#include "osmosis/stepper.hpp"
#include "osmosis/synth.hpp"
