#pragma once

#include "bandwidth.hpp"
#include "bootstrap_ci.hpp"
#include "estimators.hpp"
#include "isotonic.hpp"
#include "kernel.hpp"
#include "rng.hpp"
#include "simulation.hpp"
