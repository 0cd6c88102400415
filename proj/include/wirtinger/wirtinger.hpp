#pragma once

// Umbrella header.

#include "wirtinger/error.hpp"
#include "wirtinger/exponents.hpp"
#include "wirtinger/special.hpp"
#include "wirtinger/gtrig.hpp"
#include "wirtinger/weights.hpp"
#include "wirtinger/mesh.hpp"
#include "wirtinger/inequality.hpp"
#include "wirtinger/rayleigh.hpp"
#include "wirtinger/io.hpp"
