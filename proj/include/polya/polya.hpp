#pragma once

// Everything at once.

#include "polya/bigint.hpp"
#include "polya/constants.hpp"
#include "polya/enumeration.hpp"
#include "polya/experiments.hpp"
#include "polya/level_series.hpp"
#include "polya/local_time.hpp"
#include "polya/random.hpp"
#include "polya/report.hpp"
#include "polya/sampler.hpp"
#include "polya/series.hpp"
#include "polya/tree.hpp"
