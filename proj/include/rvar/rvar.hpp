#pragma once

#include "rvar/causality.hpp"
#include "rvar/distributions.hpp"
#include "rvar/errors.hpp"
#include "rvar/evaluation.hpp"
#include "rvar/regression.hpp"
#include "rvar/selection.hpp"
#include "rvar/simulators.hpp"
#include "rvar/time_series.hpp"
#include "rvar/window.hpp"
