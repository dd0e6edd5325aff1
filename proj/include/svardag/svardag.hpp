#ifndef SVARDAG_SVARDAG_HPP
#define SVARDAG_SVARDAG_HPP

// Umbrella header: sparse structural VAR estimation with DAG-constrained
// contemporaneous effects - model types, solver, synthetic data generation,
// evaluation metrics and file I/O.

#include "svardag/types.hpp"
#include "svardag/rng.hpp"
#include "svardag/model_core.hpp"
#include "svardag/partial_order.hpp"
#include "svardag/io.hpp"
#include "svardag/solver.hpp"
#include "svardag/dgp.hpp"
#include "svardag/evaluation.hpp"

#endif  // SVARDAG_SVARDAG_HPP
