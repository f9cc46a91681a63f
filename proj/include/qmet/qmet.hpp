#pragma once

#include "qmet/bounds.hpp"
#include "qmet/encoding.hpp"
#include "qmet/errors.hpp"
#include "qmet/estimation.hpp"
#include "qmet/information.hpp"
#include "qmet/linalg.hpp"
#include "qmet/measurement.hpp"
#include "qmet/optimizer.hpp"
#include "qmet/parallel.hpp"
#include "qmet/rng.hpp"

namespace qmet {
inline const char* version() { return "0.1.0"; }
}
