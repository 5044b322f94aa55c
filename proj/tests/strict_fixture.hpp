#pragma once

#include "isp/stages.hpp"

// Strict stages 0 and 1 with D_0 = 2^4 (the sampled estimate) and D_1 = 1.
inline isp::OperatorModel strict_model(std::size_t stages = 2) {
  isp::OperatorModel m(isp::Mode::strict);
  const long log2_D[] = {4, 0};
  for (std::size_t n = 0; n < stages; ++n) {
    isp::extend_stage(m);
    m.commit_D(n, isp::Int(log2_D[n]));
  }
  return m;
}
