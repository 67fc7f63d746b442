#pragma once

// Umbrella header for the whole library.

#include "lipdual/common.hpp"
#include "lipdual/costs.hpp"
#include "lipdual/core.hpp"
#include "lipdual/dual_gauge.hpp"
#include "lipdual/certificates.hpp"
#include "lipdual/minmax.hpp"
#include "lipdual/gauge.hpp"
#include "lipdual/oracle.hpp"
#include "lipdual/dictlearn.hpp"
