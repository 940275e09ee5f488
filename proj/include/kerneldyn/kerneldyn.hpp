#pragma once

// Umbrella header for the whole library.

#include "kerneldyn/activations.hpp"
#include "kerneldyn/common.hpp"
#include "kerneldyn/dynamics.hpp"
#include "kerneldyn/gauss.hpp"
#include "kerneldyn/hermite.hpp"
#include "kerneldyn/io.hpp"
#include "kerneldyn/kernel.hpp"
#include "kerneldyn/mc_sim.hpp"
#include "kerneldyn/philox.hpp"
#include "kerneldyn/polynomials.hpp"
#include "kerneldyn/svg.hpp"
#include "kerneldyn/version.hpp"
