#ifndef HETSHRINK_HETSHRINK_HPP
#define HETSHRINK_HETSHRINK_HPP

#include "hetshrink/bounds.hpp"
#include "hetshrink/canonical.hpp"
#include "hetshrink/core.hpp"
#include "hetshrink/direction_solver.hpp"
#include "hetshrink/estimators.hpp"
#include "hetshrink/json_io.hpp"
#include "hetshrink/registry.hpp"
#include "hetshrink/risk_eval.hpp"

#endif  // HETSHRINK_HETSHRINK_HPP
