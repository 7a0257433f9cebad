#pragma once

#include <optional>
#include <vector>

#include "dinfo/process_model.hpp"

namespace dinfo {

// Exact information quantities of a stationary model, in bits.
//
// The two central rates bound the directed information rate from Y to X
// causally conditioned on Z:
//
//   truncated rate  tdi(k) = H(X_t | X_{t-k..t-1}, Z_{t-k..t})
//                          - H(X_t | X,Y,Z over lags 1..d (plus Y_t, Z_t))
//   partial rate    pdi(k) = H(X_t | X_{t-k-d..t-1}, Y_{t-k-d..t-k-1},
//                               Z_{t-k-d..t})
//                          - (same second term)
//
// tdi(k) is an upper bound, nonincreasing in k for k >= d; pdi(k) is a lower
// bound, nondecreasing in k; both converge to the true rate. Because each
// current symbol depends on the past only through the joint d-step context,
// the common second term equals the stationary average of the X kernel row
// entropies, and the first terms are entropies of small exact marginals that
// are computed by eliminating unneeded window coordinates during a forward
// pass over the lifted chain (the window itself is never materialized).

struct VariableSelector {
  Process process = Process::X;
  int lag = 0;  // 0 = current step

  bool operator==(const VariableSelector&) const = default;
};

// Canonical order: older steps first, X before Y before Z within a step.
bool selector_before(const VariableSelector& a, const VariableSelector& b);

// Exact joint distribution of a finite set of window coordinates, dense over
// mixed-radix codes in canonical selector order.
class JointTable {
 public:
  JointTable(std::vector<VariableSelector> selectors, std::vector<int> sizes,
             std::vector<double> probs);

  const std::vector<VariableSelector>& selectors() const { return selectors_; }
  const std::vector<double>& probs() const { return probs_; }
  double total_mass() const;

  double entropy() const;  // joint entropy, bits
  // H(target | all other selectors), bits.
  double conditional_entropy(const VariableSelector& target) const;
  JointTable marginal(const std::vector<VariableSelector>& keep) const;

 private:
  std::vector<VariableSelector> selectors_;  // canonical order
  std::vector<int> sizes_;
  std::vector<long> strides_;
  std::vector<double> probs_;
};

// Exact stationary joint law of the selected coordinates. Selectors may be
// given in any order; duplicates raise SelectorError. SizeError if the dynamic
// programming table would exceed `max_cells`.
JointTable exact_joint(const TransitionModel& model,
                       std::vector<VariableSelector> selectors,
                       long max_cells = 100000000L);

// H(target | given) evaluated by brute force on an explicit window law.
// Selector lags must lie inside the window. This is the slow reference path;
// exact_joint covers the same quantity without materializing the window.
double exact_conditional_entropy(const WindowDistribution& window,
                                 const VariableSelector& target,
                                 const std::vector<VariableSelector>& given);

// Conditional mutual information I(A; B | C) in bits on an explicit window
// law. Sets must be disjoint. Result is clipped to 0 when round-off drives it
// a hair below zero.
double exact_cmi(const WindowDistribution& window,
                 const std::vector<VariableSelector>& a,
                 const std::vector<VariableSelector>& b,
                 const std::vector<VariableSelector>& c);

double exact_tdi_rate(const TransitionModel& model, int k,
                      long max_cells = 100000000L);
double exact_pdi_rate(const TransitionModel& model, int k,
                      long max_cells = 100000000L);

struct InfoRates {
  int pdi_order = 0;
  int tdi_order = 0;
  double pdi_bits = 0.0;
  double tdi_bits = 0.0;
  // Midpoint of [pdi, tdi], present only when the bracket width is at most
  // 2e-3 bits.
  std::optional<double> di_proxy_bits;

  double width() const { return tdi_bits - pdi_bits; }
};

// Evaluates the two-sided bracket pdi(k_pdi) <= rate <= tdi(k_tdi).
// Requires k_pdi >= 1 and k_tdi >= order.
InfoRates sandwich(const TransitionModel& model, int k_pdi, int k_tdi,
                   long max_cells = 100000000L);

// Stationary average of the X kernel row entropies: the per-step entropy of
// X given the full joint past and the current Y, Z.
double expected_kernel_entropy(const TransitionModel& model, Process target);

}  // namespace dinfo
