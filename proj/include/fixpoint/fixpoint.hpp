#pragma once

// Umbrella header: everything needed to define a fixed-point problem, solve
// its canonical dual, recover and label the fixed points, and cross-check
// against the primal multistart oracle.

#include "fixpoint/canonical_terms.hpp"
#include "fixpoint/dual_solver.hpp"
#include "fixpoint/oracle.hpp"
#include "fixpoint/problem.hpp"
#include "fixpoint/problem_io.hpp"
#include "fixpoint/recovery.hpp"
#include "fixpoint/report.hpp"
