#pragma once

#include "detequiv/error.hpp"
#include "detequiv/numerics.hpp"
#include "detequiv/matrix_io.hpp"
#include "detequiv/model.hpp"
#include "detequiv/solver.hpp"
#include "detequiv/spectral.hpp"
#include "detequiv/capacity.hpp"
#include "detequiv/montecarlo.hpp"
#include "detequiv/config.hpp"
#include "detequiv/runner.hpp"
