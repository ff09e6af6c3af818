#pragma once

// Confidence intervals for the difference of two binomial proportions and
// their exact frequentist coverage.

#include "propdiff/specfun.hpp"
#include "propdiff/random.hpp"
#include "propdiff/distributions.hpp"
#include "propdiff/delta_dist.hpp"
#include "propdiff/intervals.hpp"
#include "propdiff/coverage.hpp"
