#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dinfo/exact_info.hpp"
#include "dinfo/process_model.hpp"
#include "helpers.hpp"

using namespace dinfo;
using namespace dinfo::testing;

namespace {

VariableSelector sx(int lag) { return {Process::X, lag}; }
VariableSelector sy(int lag) { return {Process::Y, lag}; }
VariableSelector sz(int lag) { return {Process::Z, lag}; }

// Reference route: marginalize an explicit window law over the selected
// coordinates, dense in canonical selector order (the layout exact_joint
// promises). Keeps the test independent of the forward-elimination code.
std::vector<double> window_marginal(const WindowDistribution& w,
                                    std::vector<VariableSelector> sels) {
  std::sort(sels.begin(), sels.end(), selector_before);
  std::vector<int> sizes;
  long cells = 1;
  for (const auto& s : sels) {
    sizes.push_back(w.alphabet().size(s.process));
    cells *= sizes.back();
  }
  std::vector<double> out(cells, 0.0);
  for (const auto& [code, p] : w.entries()) {
    long c = 0;
    for (std::size_t i = 0; i < sels.size(); ++i) {
      c = c * sizes[i] + w.symbol_at(code, sels[i].process, sels[i].lag);
    }
    out[c] += p;
  }
  return out;
}

void check_dual_route(const TransitionModel& m,
                      const std::vector<VariableSelector>& sels) {
  int max_lag = 0;
  for (const auto& s : sels) max_lag = std::max(max_lag, s.lag);
  WindowDistribution w = window_distribution(m, max_lag + 1);
  std::vector<double> ref = window_marginal(w, sels);
  JointTable t = exact_joint(m, sels);
  REQUIRE(t.probs().size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(t.probs()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

double tdi_window_oracle(const TransitionModel& m, int k) {
  int d = m.order();
  WindowDistribution w1 = window_distribution(m, k + 1);
  std::vector<VariableSelector> given;
  for (int l = 1; l <= k; ++l) given.push_back(sx(l));
  for (int l = 0; l <= k; ++l) given.push_back(sz(l));
  double term1 = exact_conditional_entropy(w1, sx(0), given);

  WindowDistribution w2 = window_distribution(m, d + 1);
  std::vector<VariableSelector> full;
  for (int l = 1; l <= d; ++l) {
    full.push_back(sx(l));
    full.push_back(sy(l));
    full.push_back(sz(l));
  }
  full.push_back(sy(0));
  full.push_back(sz(0));
  double term2 = exact_conditional_entropy(w2, sx(0), full);
  return std::max(term1 - term2, 0.0);
}

double pdi_window_oracle(const TransitionModel& m, int k) {
  int d = m.order();
  WindowDistribution w1 = window_distribution(m, k + d + 1);
  std::vector<VariableSelector> given;
  for (int l = 1; l <= k + d; ++l) given.push_back(sx(l));
  for (int l = k + 1; l <= k + d; ++l) given.push_back(sy(l));
  for (int l = 0; l <= k + d; ++l) given.push_back(sz(l));
  double term1 = exact_conditional_entropy(w1, sx(0), given);

  WindowDistribution w2 = window_distribution(m, d + 1);
  std::vector<VariableSelector> full;
  for (int l = 1; l <= d; ++l) {
    full.push_back(sx(l));
    full.push_back(sy(l));
    full.push_back(sz(l));
  }
  full.push_back(sy(0));
  full.push_back(sz(0));
  double term2 = exact_conditional_entropy(w2, sx(0), full);
  return std::max(term1 - term2, 0.0);
}

}  // namespace

TEST_CASE("selector ordering is older-first then X,Y,Z") {
  CHECK(selector_before(sx(2), sx(1)));
  CHECK(!selector_before(sx(1), sx(2)));
  CHECK(selector_before(sx(1), sy(1)));
  CHECK(selector_before(sy(1), sz(1)));
  CHECK(selector_before(sy(3), sx(2)));
}

TEST_CASE("joint table entropy and conditional entropy") {
  // Two fair coins, independent.
  JointTable t({sx(1), sx(0)}, {2, 2}, {0.25, 0.25, 0.25, 0.25});
  CHECK(t.entropy() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(t.conditional_entropy(sx(0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.total_mass() == doctest::Approx(1.0));

  // Perfectly correlated pair.
  JointTable c({sx(1), sx(0)}, {2, 2}, {0.5, 0.0, 0.0, 0.5});
  CHECK(c.entropy() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.conditional_entropy(sx(0)) == doctest::Approx(0.0));

  JointTable m = t.marginal({sx(0)});
  CHECK(m.probs() == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(t.conditional_entropy(sy(0)), SelectorError);
  CHECK_THROWS_AS(t.marginal({sy(5)}), SelectorError);
}

TEST_CASE("exact joint agrees with the explicit window law") {
  // Order 1 with a live Z coordinate.
  TransitionModel mz = sample_structured_model(StructureTemplate::full(1, true),
                                               {2, 2, 2}, 1, 101);
  check_dual_route(mz, {sx(0), sy(0), sz(0)});
  check_dual_route(mz, {sx(0), sx(1), sy(2), sz(1)});
  check_dual_route(mz, {sx(3), sy(3), sx(0)});

  // Order 2: lags at or below the order read straight off the lifted state,
  // deeper lags require forward steps. Cover both regimes.
  TransitionModel m2 = sample_structured_model(StructureTemplate::full(2, false),
                                               {2, 2, 1}, 2, 102);
  check_dual_route(m2, {sx(1), sy(2)});
  check_dual_route(m2, {sx(0), sx(1), sx(2), sy(1)});
  check_dual_route(m2, {sx(0), sx(2), sy(4), sx(4)});
}

TEST_CASE("exact joint input order does not matter") {
  TransitionModel m = sample_structured_model(StructureTemplate::preset("s3"),
                                              {4, 4, 1}, 1, 103);
  JointTable a = exact_joint(m, {sx(0), sx(1), sy(2)});
  JointTable b = exact_joint(m, {sy(2), sx(1), sx(0)});
  CHECK(a.selectors() == b.selectors());
  CHECK(a.probs() == b.probs());
}

TEST_CASE("exact joint guards") {
  TransitionModel m = iid_uniform_model(4, 4, 1, 1);
  CHECK_THROWS_AS(exact_joint(m, {sx(0), sx(0)}), SelectorError);
  std::vector<VariableSelector> many;
  for (int l = 0; l < 12; ++l) many.push_back(sx(l));
  CHECK_THROWS_AS(exact_joint(m, many, 1000), SizeError);
  std::vector<VariableSelector> negative{{Process::X, -1}};
  CHECK_THROWS_AS(exact_joint(m, negative), SelectorError);
}

TEST_CASE("conditional mutual information on window laws") {
  TransitionModel iid = iid_uniform_model(2, 2, 1, 1);
  WindowDistribution wi = window_distribution(iid, 2);
  CHECK(exact_cmi(wi, {sx(0)}, {sy(0)}, {}) == doctest::Approx(0.0));
  CHECK(exact_cmi(wi, {sx(0)}, {sy(1)}, {sx(1)}) == doctest::Approx(0.0));

  WindowDistribution wc = window_distribution(copy_model(), 2);
  CHECK(exact_cmi(wc, {sx(0)}, {sy(1)}, {}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Symmetry in the first two arguments.
  CHECK(exact_cmi(wc, {sy(1)}, {sx(0)}, {sx(1)}) ==
        doctest::Approx(exact_cmi(wc, {sx(0)}, {sy(1)}, {sx(1)})).epsilon(1e-12));
  CHECK_THROWS_AS(exact_cmi(wc, {sx(0)}, {sx(0)}, {}), DisjointnessError);
  CHECK_THROWS_AS(exact_cmi(wc, {sx(0)}, {sy(0)}, {sy(0)}), DisjointnessError);
}

TEST_CASE("kernel entropy identity") {
  // The second term of both rates: conditioning on the current Y, Z adds
  // nothing once the joint d-past is given, so the window-law entropy must
  // equal the stationary average of kernel row entropies.
  TransitionModel m = sample_structured_model(StructureTemplate::full(1, true),
                                              {2, 2, 2}, 1, 104);
  WindowDistribution w = window_distribution(m, 2);
  double via_window = exact_conditional_entropy(
      w, sx(0), {sx(1), sy(1), sz(1), sy(0), sz(0)});
  CHECK(expected_kernel_entropy(m, Process::X) ==
        doctest::Approx(via_window).epsilon(1e-12));

  TransitionModel relay = noisy_relay_model(0.9, 0.1);
  double hb9 = -(0.9 * std::log2(0.9) + 0.1 * std::log2(0.1));
  CHECK(expected_kernel_entropy(relay, Process::Y) ==
        doctest::Approx(hb9).epsilon(1e-12));
  WindowDistribution wr = window_distribution(relay, 2);
  double sticky = exact_conditional_entropy(wr, sy(0), {sy(1)});
  CHECK(std::abs(sticky - 0.4690) <= 1e-4);
}

TEST_CASE("copy model transfers exactly one bit") {
  TransitionModel m = copy_model();
  CHECK(exact_tdi_rate(m, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_pdi_rate(m, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_tdi_rate(m, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("no influence means zero rate at every truncation") {
  TransitionModel m = chain_x_model(0.25, 0.5);
  for (int k = 1; k <= 4; ++k) {
    CHECK(exact_tdi_rate(m, k) <= 1e-12);
    CHECK(exact_pdi_rate(m, k) <= 1e-12);
  }
}

TEST_CASE("truncated and partial rates match the window oracle") {
  TransitionModel mz = sample_structured_model(StructureTemplate::full(1, true),
                                               {2, 2, 2}, 1, 105);
  for (int k = 1; k <= 3; ++k) {
    CHECK(exact_tdi_rate(mz, k) ==
          doctest::Approx(tdi_window_oracle(mz, k)).epsilon(1e-10));
    CHECK(exact_pdi_rate(mz, k) ==
          doctest::Approx(pdi_window_oracle(mz, k)).epsilon(1e-10));
  }

  TransitionModel m2 = sample_structured_model(StructureTemplate::full(2, false),
                                               {2, 2, 1}, 2, 106);
  for (int k = 1; k <= 2; ++k) {
    CHECK(exact_tdi_rate(m2, k + 1) ==
          doctest::Approx(tdi_window_oracle(m2, k + 1)).epsilon(1e-10));
    CHECK(exact_pdi_rate(m2, k) ==
          doctest::Approx(pdi_window_oracle(m2, k)).epsilon(1e-10));
  }
}

TEST_CASE("bounds are monotone and ordered") {
  TransitionModel m = sample_structured_model(StructureTemplate::preset("s3"),
                                              {4, 4, 1}, 1, 107);
  std::vector<double> tdi, pdi;
  for (int k = 1; k <= 5; ++k) {
    tdi.push_back(exact_tdi_rate(m, k));
    pdi.push_back(exact_pdi_rate(m, k));
  }
  for (int i = 1; i < 5; ++i) {
    CHECK(tdi[i] <= tdi[i - 1] + 1e-12);
    CHECK(pdi[i] >= pdi[i - 1] - 1e-12);
  }
  CHECK(*std::max_element(pdi.begin(), pdi.end()) <=
        *std::min_element(tdi.begin(), tdi.end()) + 1e-12);
}

TEST_CASE("hidden influence keeps the bracket strictly open") {
  TransitionModel m = noisy_relay_model(0.9, 0.1);
  InfoRates r1 = sandwich(m, 1, 1);
  CHECK(r1.tdi_bits - r1.pdi_bits > 0.05);
  CHECK_FALSE(r1.di_proxy_bits.has_value());

  InfoRates r8 = sandwich(m, 8, 8);
  CHECK(r8.width() < r1.width());
  CHECK(r8.pdi_bits >= r1.pdi_bits - 1e-12);
  CHECK(r8.tdi_bits <= r1.tdi_bits + 1e-12);
}

TEST_CASE("sandwich midpoint appears when the bracket closes") {
  InfoRates r = sandwich(copy_model(), 1, 1);
  CHECK(r.pdi_bits == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.tdi_bits == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(r.di_proxy_bits.has_value());
  CHECK(*r.di_proxy_bits == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.pdi_order == 1);
  CHECK(r.tdi_order == 1);
}

TEST_CASE("sandwich order guards") {
  TransitionModel m2 = sample_structured_model(StructureTemplate::full(2, false),
                                               {2, 2, 1}, 2, 108);
  CHECK_THROWS_AS(sandwich(m2, 0, 2), SelectorError);
  CHECK_THROWS_AS(sandwich(m2, 1, 1), SelectorError);
  CHECK_THROWS_AS(exact_tdi_rate(m2, 0), SelectorError);
  CHECK_THROWS_AS(exact_pdi_rate(m2, 0), SelectorError);
}
