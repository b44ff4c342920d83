#pragma once

#include "dsgraph/bench.hpp"
#include "dsgraph/error.hpp"
#include "dsgraph/graph.hpp"
#include "dsgraph/mse.hpp"
#include "dsgraph/random.hpp"
#include "dsgraph/recovery.hpp"
#include "dsgraph/solvers.hpp"
#include "dsgraph/spectral.hpp"
