#pragma once

#include "mfbm/filtering.hpp"

#include <vector>

namespace mfbm::detail {

// Evaluates  S(h) = Σ_{k,l} a_k b_l c(sign(h + d_kl)) |h + d_kl|^α,
// d_kl = pos_a[k] − pos_b[l], with c(+) = c_pos and c(−) = c_neg.
//
// Both tap sets annihilate polynomials of degree < qa (resp. qb), so for
// |h| large the leading qa+qb terms of the binomial expansion of |h + d|^α
// vanish identically. Far from the origin the sum is evaluated through that
// expansion instead of the direct sum, which would otherwise lose every
// significant digit to cancellation.
class LagKernel {
 public:
  LagKernel(const std::vector<double>& a, const std::vector<double>& pos_a, int qa,
            const std::vector<double>& b, const std::vector<double>& pos_b, int qb,
            double alpha);

  double operator()(double h, double c_pos, double c_neg) const;

  double max_offset() const { return max_d_; }

 private:
  struct Term {
    double d;
    double w;
  };
  std::vector<Term> terms_;
  double max_d_ = 0.0;
  double abs_weight_ = 0.0;
  double alpha_;
  int first_order_;
  std::vector<double> scaled_moments_;  // Σ w (d / max_d)^r
  std::vector<double> binom_;           // binom(α, r)
};

// Kernel for γ^{m1,m2}_ij: a_k at positions m1·k against a_l at m2·l.
inline LagKernel filtered_kernel(const Filter& filter, int m1, int m2, double alpha) {
  std::vector<double> pos1(filter.taps.size()), pos2(filter.taps.size());
  for (std::size_t k = 0; k < filter.taps.size(); ++k) {
    pos1[k] = static_cast<double>(m1) * static_cast<double>(k);
    pos2[k] = static_cast<double>(m2) * static_cast<double>(k);
  }
  return LagKernel(filter.taps, pos1, filter.q, filter.taps, pos2, filter.q, alpha);
}

}  // namespace mfbm::detail
