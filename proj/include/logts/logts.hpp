#pragma once

#include "logts/allocation.hpp"
#include "logts/confidence.hpp"
#include "logts/design.hpp"
#include "logts/envsim.hpp"
#include "logts/error.hpp"
#include "logts/estimation.hpp"
#include "logts/experiment.hpp"
#include "logts/instances.hpp"
#include "logts/io.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"
#include "logts/plot.hpp"
#include "logts/problems.hpp"
#include "logts/run_state.hpp"
#include "logts/sampler.hpp"
