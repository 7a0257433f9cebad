#include "dinfo/exact_info.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dinfo {

namespace {

double entropy_bits(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double row_entropy_bits(std::span<const double> row) {
  double h = 0.0;
  for (double p : row) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

long checked_cells(long a, long b, long limit, const char* what) {
  if (a > 0 && b > limit / a) {
    throw SizeError(std::string(what) + ": table would exceed cell cap");
  }
  return a * b;
}

void validate_selector(const VariableSelector& s) {
  if (s.lag < 0) throw SelectorError("selector lag must be nonnegative");
}

std::vector<VariableSelector> sorted_unique(std::vector<VariableSelector> sels) {
  for (const auto& s : sels) validate_selector(s);
  std::sort(sels.begin(), sels.end(), selector_before);
  for (std::size_t i = 1; i < sels.size(); ++i) {
    if (sels[i] == sels[i - 1]) {
      throw SelectorError("duplicate selector " +
                          std::string(process_name(sels[i].process)) + "@" +
                          std::to_string(sels[i].lag));
    }
  }
  return sels;
}

}  // namespace

bool selector_before(const VariableSelector& a, const VariableSelector& b) {
  if (a.lag != b.lag) return a.lag > b.lag;
  return static_cast<int>(a.process) < static_cast<int>(b.process);
}

JointTable::JointTable(std::vector<VariableSelector> selectors,
                       std::vector<int> sizes, std::vector<double> probs)
    : selectors_(std::move(selectors)),
      sizes_(std::move(sizes)),
      probs_(std::move(probs)) {
  if (selectors_.size() != sizes_.size()) {
    throw ShapeError("joint table: selector/size mismatch");
  }
  long cells = 1;
  strides_.resize(sizes_.size());
  for (std::size_t i = sizes_.size(); i-- > 0;) {
    strides_[i] = cells;
    cells *= sizes_[i];
  }
  if (static_cast<long>(probs_.size()) != cells) {
    throw ShapeError("joint table: wrong cell count");
  }
}

double JointTable::total_mass() const {
  return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

double JointTable::entropy() const { return entropy_bits(probs_); }

double JointTable::conditional_entropy(const VariableSelector& target) const {
  auto it = std::find(selectors_.begin(), selectors_.end(), target);
  if (it == selectors_.end()) {
    throw SelectorError("conditional_entropy: target not in table");
  }
  std::size_t ti = static_cast<std::size_t>(it - selectors_.begin());
  long stride = strides_[ti];
  long size = sizes_[ti];
  std::vector<double> ctx(probs_.size() / size, 0.0);
  for (long c = 0; c < static_cast<long>(probs_.size()); ++c) {
    long reduced = (c / (stride * size)) * stride + (c % stride);
    ctx[reduced] += probs_[c];
  }
  return entropy_bits(probs_) - entropy_bits(ctx);
}

JointTable JointTable::marginal(const std::vector<VariableSelector>& keep) const {
  std::vector<VariableSelector> sels = sorted_unique(keep);
  std::vector<int> sizes(sels.size());
  std::vector<long> pos(sels.size());
  for (std::size_t i = 0; i < sels.size(); ++i) {
    auto it = std::find(selectors_.begin(), selectors_.end(), sels[i]);
    if (it == selectors_.end()) {
      throw SelectorError("marginal: selector not in table");
    }
    pos[i] = it - selectors_.begin();
    sizes[i] = sizes_[pos[i]];
  }
  long cells = 1;
  for (int s : sizes) cells *= s;
  std::vector<double> out(cells, 0.0);
  for (long c = 0; c < static_cast<long>(probs_.size()); ++c) {
    long code = 0;
    for (std::size_t i = 0; i < sels.size(); ++i) {
      long digit = (c / strides_[pos[i]]) % sizes_[pos[i]];
      code = code * sizes[i] + digit;
    }
    out[code] += probs_[c];
  }
  return JointTable(std::move(sels), std::move(sizes), std::move(out));
}

JointTable exact_joint(const TransitionModel& model,
                       std::vector<VariableSelector> selectors, long max_cells) {
  std::vector<VariableSelector> sels = sorted_unique(std::move(selectors));
  const AlphabetSpec& alpha = model.alphabet();
  int d = model.order();
  long s_count = model.lifted_state_count();
  long joint = alpha.joint_size();

  int max_lag = 0;
  for (const auto& s : sels) max_lag = std::max(max_lag, s.lag);
  int window = std::max(max_lag + 1, d);
  auto time_of = [&](const VariableSelector& s) { return window - s.lag; };

  std::vector<int> sizes(sels.size());
  for (std::size_t i = 0; i < sels.size(); ++i) {
    sizes[i] = alpha.size(sels[i].process);
  }

  StationaryDistribution pi = stationary_distribution(model);

  // Transition weights and shift targets, shared by every step.
  std::vector<double> step(s_count * joint);
  std::vector<long> shift(s_count * joint);
  for (long s = 0; s < s_count; ++s) {
    for (long j = 0; j < joint; ++j) {
      step[s * joint + j] = model.joint_step_prob(s, j);
      shift[s * joint + j] = model.lifted_shift(s, j);
    }
  }

  // Selectors landing in the initial block (times 1..d) form a prefix of the
  // canonical order; their digits are read straight off the lifted state.
  std::size_t prefix = 0;
  while (prefix < sels.size() && time_of(sels[prefix]) <= d) ++prefix;

  long kept = 1;
  for (std::size_t i = 0; i < prefix; ++i) {
    kept = checked_cells(kept, sizes[i], max_cells, "exact_joint");
  }
  checked_cells(kept, s_count, max_cells, "exact_joint");

  std::vector<double> tab(kept * s_count, 0.0);
  {
    std::vector<long> pow_joint(d + 1, 1);
    for (int i = 1; i <= d; ++i) pow_joint[i] = pow_joint[i - 1] * joint;
    for (long s = 0; s < s_count; ++s) {
      if (pi.probs[s] == 0.0) continue;
      long code = 0;
      for (std::size_t i = 0; i < prefix; ++i) {
        int t = time_of(sels[i]);
        long j = (s / pow_joint[d - t]) % joint;
        int x, y, z;
        model.decompose_joint(j, x, y, z);
        int v = sels[i].process == Process::X   ? x
                : sels[i].process == Process::Y ? y
                                                : z;
        code = code * sizes[i] + v;
      }
      tab[code * s_count + s] += pi.probs[s];
    }
  }

  // Forward elimination: extend one step at a time, keeping only selected
  // coordinates.
  std::size_t next_sel = prefix;
  std::vector<double> fresh;
  for (int t = d + 1; t <= window; ++t) {
    long factor = 1;
    std::size_t first = next_sel;
    while (next_sel < sels.size() && time_of(sels[next_sel]) == t) {
      factor *= sizes[next_sel];
      ++next_sel;
    }
    long kept_next = checked_cells(kept, factor, max_cells, "exact_joint");
    checked_cells(kept_next, s_count, max_cells, "exact_joint");

    // Contribution of each joint symbol to the kept code at this step.
    std::vector<long> code_of(joint, 0);
    for (long j = 0; j < joint; ++j) {
      int x, y, z;
      model.decompose_joint(j, x, y, z);
      long code = 0;
      for (std::size_t i = first; i < next_sel; ++i) {
        int v = sels[i].process == Process::X   ? x
                : sels[i].process == Process::Y ? y
                                                : z;
        code = code * sizes[i] + v;
      }
      code_of[j] = code;
    }

    fresh.assign(kept_next * s_count, 0.0);
    for (long kc = 0; kc < kept; ++kc) {
      const double* src = tab.data() + kc * s_count;
      for (long s = 0; s < s_count; ++s) {
        double v = src[s];
        if (v == 0.0) continue;
        const double* w = step.data() + s * joint;
        const long* sh = shift.data() + s * joint;
        long base = kc * factor;
        for (long j = 0; j < joint; ++j) {
          if (w[j] == 0.0) continue;
          fresh[(base + code_of[j]) * s_count + sh[j]] += v * w[j];
        }
      }
    }
    tab.swap(fresh);
    kept = kept_next;
  }

  std::vector<double> out(kept, 0.0);
  for (long kc = 0; kc < kept; ++kc) {
    const double* src = tab.data() + kc * s_count;
    double acc = 0.0;
    for (long s = 0; s < s_count; ++s) acc += src[s];
    out[kc] = acc;
  }
  return JointTable(std::move(sels), std::move(sizes), std::move(out));
}

namespace {

// Dense accumulator for window-law marginals keyed by selector digits.
struct WindowAccumulator {
  std::vector<const VariableSelector*> sels;
  std::vector<long> radix;
  std::vector<double> probs;

  void init(const WindowDistribution& w,
            std::initializer_list<const std::vector<VariableSelector>*> groups,
            long max_cells) {
    long cells = 1;
    for (const auto* g : groups) {
      for (const auto& s : *g) {
        sels.push_back(&s);
        long r = w.alphabet().size(s.process);
        radix.push_back(r);
        cells = checked_cells(cells, r, max_cells, "exact window marginal");
      }
    }
    probs.assign(cells, 0.0);
  }

  void add(const WindowDistribution& w, std::uint64_t code, double p) {
    long idx = 0;
    for (std::size_t i = 0; i < sels.size(); ++i) {
      idx = idx * radix[i] + w.symbol_at(code, sels[i]->process, sels[i]->lag);
    }
    probs[idx] += p;
  }
};

void check_window_selectors(const WindowDistribution& w,
                            const std::vector<VariableSelector>& sels) {
  for (const auto& s : sels) {
    if (s.lag < 0 || s.lag >= w.length()) {
      throw SelectorError("selector lag " + std::to_string(s.lag) +
                          " outside window of length " +
                          std::to_string(w.length()));
    }
  }
}

void check_disjoint(const std::vector<VariableSelector>& a,
                    const std::vector<VariableSelector>& b,
                    const char* what) {
  for (const auto& s : a) {
    if (std::find(b.begin(), b.end(), s) != b.end()) {
      throw DisjointnessError(std::string(what) + ": selector sets overlap");
    }
  }
}

}  // namespace

double exact_conditional_entropy(const WindowDistribution& window,
                                 const VariableSelector& target,
                                 const std::vector<VariableSelector>& given) {
  check_window_selectors(window, {target});
  check_window_selectors(window, given);
  std::vector<VariableSelector> tvec{target};
  check_disjoint(tvec, given, "exact_conditional_entropy");
  sorted_unique(given);  // reject duplicates

  WindowAccumulator joint, ctx;
  joint.init(window, {&tvec, &given}, 100000000L);
  ctx.init(window, {&given}, 100000000L);
  for (const auto& [code, p] : window.entries()) {
    joint.add(window, code, p);
    ctx.add(window, code, p);
  }
  return entropy_bits(joint.probs) - entropy_bits(ctx.probs);
}

double exact_cmi(const WindowDistribution& window,
                 const std::vector<VariableSelector>& a,
                 const std::vector<VariableSelector>& b,
                 const std::vector<VariableSelector>& c) {
  check_window_selectors(window, a);
  check_window_selectors(window, b);
  check_window_selectors(window, c);
  check_disjoint(a, b, "exact_cmi");
  check_disjoint(a, c, "exact_cmi");
  check_disjoint(b, c, "exact_cmi");
  if (a.empty() || b.empty()) throw SelectorError("exact_cmi: empty set");

  WindowAccumulator ac, bc, cc, abc;
  ac.init(window, {&a, &c}, 100000000L);
  bc.init(window, {&b, &c}, 100000000L);
  cc.init(window, {&c}, 100000000L);
  abc.init(window, {&a, &b, &c}, 100000000L);
  for (const auto& [code, p] : window.entries()) {
    ac.add(window, code, p);
    bc.add(window, code, p);
    cc.add(window, code, p);
    abc.add(window, code, p);
  }
  double v = entropy_bits(ac.probs) + entropy_bits(bc.probs) -
             entropy_bits(cc.probs) - entropy_bits(abc.probs);
  if (v < 0.0) {
    if (v < -1e-9) {
      throw std::logic_error("exact_cmi: negative beyond round-off");
    }
    v = 0.0;
  }
  return v;
}

double expected_kernel_entropy(const TransitionModel& model, Process target) {
  StationaryDistribution pi = stationary_distribution(model);
  double h = 0.0;
  for (long s = 0; s < model.lifted_state_count(); ++s) {
    if (pi.probs[s] == 0.0) continue;
    h += pi.probs[s] * row_entropy_bits(model.row(target, model.context_of_lifted(s)));
  }
  return h;
}

double exact_tdi_rate(const TransitionModel& model, int k, long max_cells) {
  if (k < 1) throw SelectorError("exact_tdi_rate: k must be >= 1");
  int d = model.order();

  std::vector<VariableSelector> sels;
  for (int lag = 0; lag <= k; ++lag) sels.push_back({Process::X, lag});
  for (int lag = 0; lag <= k; ++lag) sels.push_back({Process::Z, lag});
  double first =
      exact_joint(model, sels, max_cells).conditional_entropy({Process::X, 0});

  double second;
  if (k >= d) {
    second = expected_kernel_entropy(model, Process::X);
  } else {
    std::vector<VariableSelector> full;
    for (int lag = 0; lag <= k; ++lag) {
      full.push_back({Process::X, lag});
      full.push_back({Process::Y, lag});
      full.push_back({Process::Z, lag});
    }
    second = exact_joint(model, full, max_cells)
                 .conditional_entropy({Process::X, 0});
  }
  return std::max(first - second, 0.0);
}

double exact_pdi_rate(const TransitionModel& model, int k, long max_cells) {
  if (k < 1) throw SelectorError("exact_pdi_rate: k must be >= 1");
  int d = model.order();

  std::vector<VariableSelector> sels;
  sels.push_back({Process::X, 0});
  for (int lag = 1; lag <= k + d; ++lag) sels.push_back({Process::X, lag});
  for (int lag = k + 1; lag <= k + d; ++lag) sels.push_back({Process::Y, lag});
  for (int lag = 0; lag <= k + d; ++lag) sels.push_back({Process::Z, lag});
  double first =
      exact_joint(model, sels, max_cells).conditional_entropy({Process::X, 0});
  double second = expected_kernel_entropy(model, Process::X);
  return std::max(first - second, 0.0);
}

InfoRates sandwich(const TransitionModel& model, int k_pdi, int k_tdi,
                   long max_cells) {
  if (k_pdi < 1) throw SelectorError("sandwich: partial order must be >= 1");
  if (k_tdi < model.order()) {
    throw SelectorError("sandwich: truncation order below model order");
  }
  InfoRates r;
  r.pdi_order = k_pdi;
  r.tdi_order = k_tdi;
  r.pdi_bits = exact_pdi_rate(model, k_pdi, max_cells);
  r.tdi_bits = exact_tdi_rate(model, k_tdi, max_cells);
  if (r.pdi_bits > r.tdi_bits + 1e-9) {
    throw std::logic_error("sandwich: lower bound exceeds upper bound");
  }
  if (r.width() <= 2e-3) {
    r.di_proxy_bits = 0.5 * (r.pdi_bits + r.tdi_bits);
  }
  return r;
}

}  // namespace dinfo
