#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace epca::corobust {

/// Optimal sample weights of the collaborative-robust problem
///
///   min_w  sum_i f_i / (1 - w_i)   s.t.  sum_i w_i = 1,  0 <= w_i < 1.
///
/// Exactly `active_count` weights are strictly positive. `lambda` is the
/// squared KKT multiplier of the sum constraint; it is 0 when two or more
/// losses vanish (the zero-loss samples then share the mass evenly).
struct WeightVector {
  std::vector<double> weights;
  std::size_t active_count = 0;
  double lambda = 0.0;
};

/// 1e-12 times the largest loss (or 1e-12 when every loss is zero).
double default_zero_floor(std::span<const double> losses);

/// Whether `k` activated samples is consistent with the sorted (ascending),
/// strictly positive losses:
///
///   sum_{i<=k} sqrt f_i / sqrt f_{k+1} + 1 <= k < sum_{i<=k} sqrt f_i / sqrt f_k + 1.
///
/// At k == n only the right-hand inequality exists. Evaluated in
/// multiplied-out form so no division happens.
bool activation_constraint_holds(std::span<const double> sorted_losses, std::size_t k);

/// Closed-form solution of the weight problem for fixed losses.
///
/// Losses are sorted ascending (stably), k is scanned upward from 2 and the
/// first k meeting activation_constraint_holds is taken. A single zero loss
/// is lifted by `zero_floor` (default_zero_floor when not given) so that at
/// least two samples stay active.
///
/// Throws ValidationError on negative/non-finite losses and DimensionError
/// when fewer than two losses are given.
WeightVector solve_weights(std::span<const double> losses,
                           std::optional<double> zero_floor = std::nullopt);

/// 1 / (1 - w_i); inactive samples map to exactly 1.
std::vector<double> direct_weights(const WeightVector& wv);

/// sum_i f_i / (1 - w_i).
double objective_value(std::span<const double> losses, const WeightVector& wv);

}  // namespace epca::corobust
