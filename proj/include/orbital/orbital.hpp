#pragma once

// Umbrella header for the orbital-measure library.

#include "orbital/config.hpp"
#include "orbital/error.hpp"
#include "orbital/ifs.hpp"
#include "orbital/io.hpp"
#include "orbital/measure.hpp"
#include "orbital/numeric.hpp"
#include "orbital/philox.hpp"
#include "orbital/point.hpp"
#include "orbital/sampler.hpp"
#include "orbital/series.hpp"
#include "orbital/transfer.hpp"
#include "orbital/verify.hpp"
