#pragma once

#include <vcqr/pinball.hpp>

namespace vcqr::testing {

//! Exact minimizer of a small pinball problem by enumerating candidate
//! basic solutions: the intersections of every p-subset of the
//! (penalty-augmented) zero-residual hyperplanes. Independent of the
//! interior-point path; limited to p <= 3 and rows <= 25.
PinballSolution brute_force_oracle(const PinballProblem& problem);

//! Same enumeration with a relaxed row budget, for composite problems
//! whose rows replicate each observation once per quantile level.
PinballSolution brute_force_oracle_extended(const PinballProblem& problem);

} // namespace vcqr::testing
