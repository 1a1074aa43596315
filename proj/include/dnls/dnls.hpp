#pragma once

// Umbrella header.

#include "damping.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "evolution.hpp"
#include "fft.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "ground_state.hpp"
#include "io.hpp"
#include "random_fields.hpp"
#include "scenario.hpp"
#include "theorem_checks.hpp"
