#pragma once

#include "isp/operator.hpp"

// Four small stages that respect the interleaving Delta < b < 2b < s < a but
// none of the growth conditions.  Every D_n is 2.
inline isp::OperatorModel toy_model(std::size_t stages = 4) {
  using isp::Int;
  isp::OperatorModel m(isp::Mode::toy);
  const long a[] = {4, 16, 64, 250};
  const long b[] = {0, 6, 30, 120};
  const long s[] = {0, 14, 62, 242};
  for (std::size_t n = 0; n < stages; ++n) {
    isp::StageChoice c;
    c.a = a[n];
    if (n > 0) {
      c.b = Int(b[n]);
      c.s = Int(s[n]);
    }
    m.push_stage(c);
    m.commit_D(n, Int(1));
  }
  return m;
}
