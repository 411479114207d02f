#pragma once

#include "gazepair/arbiter.hpp"
#include "gazepair/correlation.hpp"
#include "gazepair/dwell.hpp"
#include "gazepair/gesture.hpp"
#include "gazepair/harness.hpp"
#include "gazepair/interface_model.hpp"
#include "gazepair/io.hpp"
#include "gazepair/metrics.hpp"
#include "gazepair/orbit.hpp"
#include "gazepair/pursuits.hpp"
#include "gazepair/simulator.hpp"
#include "gazepair/types.hpp"
