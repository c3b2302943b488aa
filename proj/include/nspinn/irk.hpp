#pragma once

#include "nspinn/lcp.hpp"

namespace nspinn {

struct ButcherTableau {
  int order = 0;  // number of stages R
  Mat a;          // R x R
  Vec b;          // R
  Vec c;          // R, ascending
};

// Gauss-Legendre collocation tableau with R stages (1 <= R <= 100).
ButcherTableau irk_coefficients(int R);

}  // namespace nspinn
