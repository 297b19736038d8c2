#pragma once

#include "prhc/harness/scenario.hpp"

#include <vector>

namespace prhc::harness {

struct OracleOptions
{
  double grid_res = 1e-3;
  double u_box = 2.0;
  double max_points = 1e8;      // exhaustive enumeration limit
  bool refine = true;           // coarse-to-fine search when the full grid is over budget
  double level_points = 2e6;    // per refinement level
};

struct OracleResult
{
  double J = 0;
  std::vector<Vector> u;        // minimiser, one input per step
  double evaluations = 0;
  bool exhaustive = false;
  double spacing = 0;           // grid spacing of the final level
};

/**
 * Grid minimum of sum_t c_t(x_t, u_t) over open-loop inputs in [-u_box, u_box]^{T m},
 * with the disturbances known in advance.
 *
 * The full lattice of spacing grid_res is enumerated when it has at most
 * max_points nodes. Otherwise, with `refine`, a coarse grid is searched and
 * repeatedly re-centred and shrunk around the incumbent until the spacing
 * reaches grid_res; this is exact up to the grid for convex objectives only.
 * Without `refine` an over-budget grid throws std::length_error.
 */
OracleResult brute_force_oracle(const LinearSystem<double>& sys, const CostModel<double>& costs,
                                const DisturbanceSequence<double>& w, const Vector& x1, Index T,
                                const OracleOptions& opts = {});

OracleResult brute_force_oracle(const Scenario& sc, const OracleOptions& opts = {});

}  // namespace prhc::harness
