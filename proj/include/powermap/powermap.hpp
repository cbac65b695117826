#pragma once

#include "powermap/baselines.hpp"
#include "powermap/dataset_io.hpp"
#include "powermap/features.hpp"
#include "powermap/matrix.hpp"
#include "powermap/metrics.hpp"
#include "powermap/pipeline.hpp"
#include "powermap/power_engine.hpp"
#include "powermap/rng.hpp"
#include "powermap/run_config.hpp"
#include "powermap/special_math.hpp"
#include "powermap/stat_models.hpp"
#include "powermap/surrogate.hpp"
#include "powermap/svg_plot.hpp"
