#include "epca/corobust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "epca/errors.hpp"

namespace epca::corobust {

double default_zero_floor(std::span<const double> losses) {
  double largest = 0.0;
  for (double f : losses) largest = std::max(largest, f);
  return 1e-12 * (largest > 0.0 ? largest : 1.0);
}

bool activation_constraint_holds(std::span<const double> sorted_losses, std::size_t k) {
  const std::size_t n = sorted_losses.size();
  if (k < 2 || k > n) return false;
  double root_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) root_sum += std::sqrt(sorted_losses[i]);
  const double km1 = static_cast<double>(k - 1);
  const bool upper = km1 * std::sqrt(sorted_losses[k - 1]) < root_sum;
  if (k == n) return upper;
  const bool lower = root_sum <= km1 * std::sqrt(sorted_losses[k]);
  return lower && upper;
}

namespace {

void validate(std::span<const double> losses) {
  if (losses.size() < 2) {
    throw DimensionError("solve_weights: need at least 2 losses, got " +
                         std::to_string(losses.size()));
  }
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i]) || losses[i] < 0.0) {
      throw ValidationError("solve_weights: loss " + std::to_string(i) +
                            " is negative or non-finite");
    }
  }
}

}  // namespace

WeightVector solve_weights(std::span<const double> losses, std::optional<double> zero_floor) {
  validate(losses);
  const std::size_t n = losses.size();

  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < n; ++i) {
    if (losses[i] == 0.0) zeros.push_back(i);
  }

  WeightVector out;
  out.weights.assign(n, 0.0);

  if (zeros.size() > 1) {
    const double share = 1.0 / static_cast<double>(zeros.size());
    for (std::size_t i : zeros) out.weights[i] = share;
    out.active_count = zeros.size();
    out.lambda = 0.0;
    return out;
  }

  std::vector<double> f(losses.begin(), losses.end());
  if (zeros.size() == 1) {
    const double floor = zero_floor.value_or(default_zero_floor(losses));
    if (!(floor > 0.0) || !std::isfinite(floor)) {
      throw ValidationError("solve_weights: zero_floor must be positive and finite");
    }
    f[zeros.front()] += floor;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  std::vector<double> sorted(n);
  std::vector<double> roots(n);
  for (std::size_t j = 0; j < n; ++j) {
    sorted[j] = f[order[j]];
    roots[j] = std::sqrt(sorted[j]);
  }

  // Scan k upward with running prefix sums of sqrt f.
  std::size_t k = 0;
  double root_sum = roots[0];
  for (std::size_t cand = 2; cand <= n; ++cand) {
    root_sum += roots[cand - 1];
    const double km1 = static_cast<double>(cand - 1);
    const bool upper = km1 * roots[cand - 1] < root_sum;
    const bool lower = cand == n || root_sum <= km1 * roots[cand];
    if (upper && lower) {
      k = cand;
      break;
    }
  }
  if (k == 0) {
    // Round-off can push every candidate just outside the bracket. The
    // largest k whose own loss is still below the threshold is the answer.
    double s = roots[0];
    k = 2;
    for (std::size_t cand = 2; cand <= n; ++cand) {
      s += roots[cand - 1];
      if (static_cast<double>(cand - 1) * roots[cand - 1] < s) k = cand;
    }
  }

  double active_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) active_sum += roots[j];
  const double threshold = active_sum / static_cast<double>(k - 1);  // sqrt(lambda)
  out.lambda = threshold * threshold;
  out.active_count = k;
  for (std::size_t j = 0; j < k; ++j) {
    out.weights[order[j]] = std::max(0.0, 1.0 - roots[j] / threshold);
  }
  return out;
}

std::vector<double> direct_weights(const WeightVector& wv) {
  std::vector<double> out(wv.weights.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = wv.weights[i];
    if (!(w < 1.0) || !(w >= 0.0)) {
      throw InvariantError("direct_weights: weight " + std::to_string(i) +
                           " outside [0, 1)");
    }
    out[i] = 1.0 / (1.0 - w);
  }
  return out;
}

double objective_value(std::span<const double> losses, const WeightVector& wv) {
  if (losses.size() != wv.weights.size()) {
    throw DimensionError("objective_value: " + std::to_string(losses.size()) +
                         " losses vs " + std::to_string(wv.weights.size()) + " weights");
  }
  const std::vector<double> hat = direct_weights(wv);
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) total += losses[i] * hat[i];
  return total;
}

}  // namespace epca::corobust
