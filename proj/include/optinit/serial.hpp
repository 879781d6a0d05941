#pragma once

// Single-threaded reference implementations of the parallel kernels. They
// perform the same Jacobi sweeps in the same summation order, so results
// must match the OpenMP versions bit for bit.

#include "optinit/mdp.hpp"

namespace optinit::serial {

ActionValueTable policy_evaluation(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                   const SolverOptions& options = {});

ActionValueTable value_iteration(const TabularMDP& mdp, const SolverOptions& options = {});

}  // namespace optinit::serial
