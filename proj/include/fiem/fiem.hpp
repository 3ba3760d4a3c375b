#pragma once

/// @file fiem.hpp
/// @brief Umbrella header.

#include "fiem/scalar.hpp"
#include "fiem/permutation.hpp"
#include "fiem/iem.hpp"
#include "fiem/family.hpp"
#include "fiem/forcing.hpp"
#include "fiem/perturbed_map.hpp"
#include "fiem/symmetry_lines.hpp"
#include "fiem/orbits.hpp"
#include "fiem/io.hpp"
#include "fiem/config.hpp"
#include "fiem/verify.hpp"
#include "fiem/parallel.hpp"
