#pragma once

#include "hlmax/catalog.hpp"
#include "hlmax/csv.hpp"
#include "hlmax/operators.hpp"
#include "hlmax/parallel.hpp"
#include "hlmax/quadrature.hpp"
#include "hlmax/rng.hpp"
#include "hlmax/spaces.hpp"
#include "hlmax/svg.hpp"
#include "hlmax/verify.hpp"
