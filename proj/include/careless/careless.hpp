#pragma once

// Umbrella header for the carelessness-detection toolkit.

#include "careless/bkfc.hpp"
#include "careless/bkt.hpp"
#include "careless/config.hpp"
#include "careless/errors.hpp"
#include "careless/event_log.hpp"
#include "careless/features.hpp"
#include "careless/ml_slip.hpp"
#include "careless/pfa.hpp"
#include "careless/pipeline.hpp"
#include "careless/stats.hpp"
#include "careless/synth_sim.hpp"
