#pragma once

// Closed-form optimal investment / liability-ratio / dividend strategies for
// a jump-diffusion insurer, with Monte Carlo validation, sensitivity
// analysis, and parameter-sweep tooling.

#include "divopt/closed_form.hpp"
#include "divopt/config.hpp"
#include "divopt/errors.hpp"
#include "divopt/model.hpp"
#include "divopt/rng.hpp"
#include "divopt/sensitivity.hpp"
#include "divopt/simulate.hpp"
#include "divopt/sweep.hpp"
#include "divopt/version.hpp"
