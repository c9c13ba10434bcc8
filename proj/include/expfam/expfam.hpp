#pragma once

// Umbrella header for the exponential-family toolkit.

#include "expfam/catalog.hpp"
#include "expfam/divergences.hpp"
#include "expfam/errors.hpp"
#include "expfam/family.hpp"
#include "expfam/inference.hpp"
#include "expfam/io.hpp"
#include "expfam/linalg.hpp"
#include "expfam/mixture.hpp"
#include "expfam/numerics.hpp"
#include "expfam/quadrature.hpp"
#include "expfam/rng.hpp"
#include "expfam/special_functions.hpp"
#include "expfam/validation.hpp"
