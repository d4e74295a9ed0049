#pragma once

#include <vector>

#include "secgames/game_core.hpp"

namespace secgames {

enum class SolveMethod { support_enumeration, fictitious_play };

struct EquilibriumResult {
  Distribution row_strategy;
  Distribution col_strategy;
  double row_value = 0.0;
  double col_value = 0.0;
  SolveMethod method = SolveMethod::support_enumeration;

  // Zero-sum game value (the row player's payoff).
  double game_value() const { return row_value; }
};

// Exact mixed equilibrium of a zero-sum game. Up to 9x9 this is support
// enumeration with linear solves (verified at eps = 1e-8); larger games up
// to 50x50 fall back to fictitious play (verified at eps = 1e-4).
EquilibriumResult solve_zero_sum(const BimatrixGame& game);

struct BimatrixSolution {
  std::vector<EquilibriumResult> equilibria;  // sorted by (row, col) support
  bool degenerate = false;
};

// All equilibria of a general-sum game up to 6x6, found by support
// enumeration over equal-size supports. Degenerate games (continuum of
// equilibria) report their vertex equilibria and set the flag.
BimatrixSolution solve_bimatrix(const BimatrixGame& game);

}  // namespace secgames
