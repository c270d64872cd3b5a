#pragma once

// Umbrella header for the full library.

#include "analysis.hpp"
#include "dynamics.hpp"
#include "ensemble.hpp"
#include "experiments.hpp"
#include "meanfield.hpp"
#include "model.hpp"
#include "observables.hpp"
#include "operators.hpp"
