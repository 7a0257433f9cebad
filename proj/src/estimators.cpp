#include "dinfo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dinfo {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double log_add_exp(double a, double b) {
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

void gather_context(const SampleSequence& seq, const ContextSpec& spec, long i,
                    std::span<int> out) {
  for (std::size_t q = 0; q < spec.context.size(); ++q) {
    const VariableSelector& s = spec.context[q];
    out[q] = seq.symbol(s.process, i - s.lag);
  }
}

}  // namespace

int ContextSpec::max_lag() const {
  int m = target.lag;
  for (const auto& s : context) m = std::max(m, s.lag);
  return m;
}

void ContextSpec::validate() const {
  if (target.lag != 0) throw SelectorError("context: target must be at lag 0");
  for (const auto& s : context) {
    if (s.lag < 0) throw SelectorError("context: negative lag");
    if (s == target) throw SelectorError("context: target inside context");
  }
  for (std::size_t i = 0; i < context.size(); ++i) {
    for (std::size_t j = i + 1; j < context.size(); ++j) {
      if (context[i] == context[j]) {
        throw SelectorError("context: duplicate selector");
      }
    }
  }
}

PredictiveModel::PredictiveModel(ContextSpec spec, const AlphabetSpec& alphabet)
    : spec_(std::move(spec)) {
  spec_.validate();
  target_size_ = alphabet.size(spec_.target.process);
  if (target_size_ < 2) throw ShapeError("predictive model: target alphabet too small");
}

PlugInModel::PlugInModel(ContextSpec spec, const AlphabetSpec& alphabet,
                         long max_cells)
    : PredictiveModel(std::move(spec), alphabet) {
  long cells = 1;
  for (const auto& s : spec_.context) {
    int r = alphabet.size(s.process);
    radix_.push_back(r);
    if (cells > max_cells / r) {
      throw SizeError("plug-in model: context table exceeds cell cap");
    }
    cells *= r;
  }
  if (cells > max_cells / target_size_) {
    throw SizeError("plug-in model: count table exceeds cell cap");
  }
  counts_.assign(cells * target_size_, 0);
  totals_.assign(cells, 0);
}

long PlugInModel::encode(std::span<const int> context) const {
  long code = 0;
  for (std::size_t q = 0; q < radix_.size(); ++q) {
    code = code * radix_[q] + context[q];
  }
  return code;
}

void PlugInModel::update(std::span<const int> context, int target) {
  long code = encode(context);
  ++counts_[code * target_size_ + target];
  ++totals_[code];
}

void PlugInModel::predict(std::span<const int> context,
                          std::span<double> out) const {
  long code = encode(context);
  double denom = totals_[code] + 0.5 * target_size_;
  const std::uint32_t* row = counts_.data() + code * target_size_;
  for (int a = 0; a < target_size_; ++a) {
    out[a] = (row[a] + 0.5) / denom;
  }
}

std::uint32_t PlugInModel::count(long context_code, int symbol) const {
  return counts_[context_code * target_size_ + symbol];
}

CtwModel::CtwModel(ContextSpec spec, const AlphabetSpec& alphabet, int depth)
    : PredictiveModel(std::move(spec), alphabet) {
  if (depth != static_cast<int>(spec_.context.size())) {
    throw DepthMismatchError("ctw: depth " + std::to_string(depth) +
                             " does not match context size " +
                             std::to_string(spec_.context.size()));
  }
  for (const auto& s : spec_.context) {
    radix_.push_back(alphabet.size(s.process));
  }
  nodes_.emplace_back();
  nodes_[0].counts.assign(target_size_, 0);
  if (!radix_.empty()) nodes_[0].children.assign(radix_[0], -1);
}

double CtwModel::kt_step_log(const Node& node, int symbol) const {
  return std::log((node.counts[symbol] + 0.5) /
                  (node.total + 0.5 * target_size_));
}

int CtwModel::ensure_child(int node, int level, int value) {
  int child = nodes_[node].children[value];
  if (child >= 0) return child;
  child = static_cast<int>(nodes_.size());
  nodes_[node].children[value] = child;
  nodes_.emplace_back();
  Node& fresh = nodes_.back();
  fresh.counts.assign(target_size_, 0);
  int next_level = level + 1;
  if (next_level < static_cast<int>(radix_.size())) {
    fresh.children.assign(radix_[next_level], -1);
  }
  return child;
}

void CtwModel::update(std::span<const int> context, int target) {
  int depth = static_cast<int>(radix_.size());
  std::vector<int> path(depth + 1);
  path[0] = 0;
  for (int q = 0; q < depth; ++q) {
    path[q + 1] = ensure_child(path[q], q, context[q]);
  }

  double child_w_new = 0.0, child_w_old = 0.0;
  for (int q = depth; q >= 0; --q) {
    Node& node = nodes_[path[q]];
    node.kt_log += kt_step_log(node, target);
    ++node.counts[target];
    ++node.total;
    double w_old = node.w_log;
    if (q == depth) {
      node.w_log = node.kt_log;
    } else {
      node.child_w_sum += child_w_new - child_w_old;
      node.w_log = -kLn2 + log_add_exp(node.kt_log, node.child_w_sum);
    }
    child_w_old = w_old;
    child_w_new = node.w_log;
  }
}

void CtwModel::predict(std::span<const int> context,
                       std::span<double> out) const {
  int depth = static_cast<int>(radix_.size());
  // Deepest existing prefix of the context path.
  std::vector<int> path;
  path.reserve(depth + 1);
  path.push_back(0);
  for (int q = 0; q < depth; ++q) {
    int child = nodes_[path.back()].children[context[q]];
    if (child < 0) break;
    path.push_back(child);
  }
  int known = static_cast<int>(path.size()) - 1;  // deepest existing level

  double uniform_log = std::log(1.0 / target_size_);
  // Weighted log-probability a fresh (never visited) subtree rooted at level
  // q assigns to one more symbol; depends only on the level.
  std::vector<double> fresh(depth + 1);
  fresh[depth] = uniform_log;
  for (int q = depth - 1; q >= known + 1; --q) {
    fresh[q] = -kLn2 + log_add_exp(uniform_log, fresh[q + 1]);
  }

  for (int a = 0; a < target_size_; ++a) {
    double child_w_new = 0.0, child_w_old = 0.0;
    if (known < depth) {
      child_w_new = fresh[known + 1];
      child_w_old = 0.0;
    }
    double w_new = 0.0;
    for (int q = known; q >= 0; --q) {
      const Node& node = nodes_[path[q]];
      double kt_new = node.kt_log + kt_step_log(node, a);
      if (q == depth) {
        w_new = kt_new;
      } else {
        double cs_new = node.child_w_sum + child_w_new - child_w_old;
        w_new = -kLn2 + log_add_exp(kt_new, cs_new);
      }
      child_w_old = node.w_log;
      child_w_new = w_new;
    }
    out[a] = std::exp(w_new - nodes_[0].w_log);
  }
}

double CtwModel::weighted_code_length_bits() const {
  return -nodes_[0].w_log / kLn2;
}

std::unique_ptr<PredictiveModel> fit_plugin(const SampleSequence& seq,
                                            const ContextSpec& spec) {
  if (seq.size() == 0) throw EmptySequenceError("fit_plugin: empty sequence");
  auto model = std::make_unique<PlugInModel>(spec, seq.alphabet);
  long start = spec.max_lag();
  if (start >= seq.size()) {
    throw EmptySequenceError("fit_plugin: sequence shorter than context lags");
  }
  std::vector<int> ctx(spec.context.size());
  for (long i = start; i < seq.size(); ++i) {
    gather_context(seq, spec, i, ctx);
    model->update(ctx, seq.symbol(spec.target.process, i));
  }
  return model;
}

std::unique_ptr<PredictiveModel> fit_ctw(const SampleSequence& seq,
                                         const ContextSpec& spec, int depth) {
  if (seq.size() == 0) throw EmptySequenceError("fit_ctw: empty sequence");
  auto model = std::make_unique<CtwModel>(spec, seq.alphabet, depth);
  long start = spec.max_lag();
  if (start >= seq.size()) {
    throw EmptySequenceError("fit_ctw: sequence shorter than context lags");
  }
  std::vector<int> ctx(spec.context.size());
  for (long i = start; i < seq.size(); ++i) {
    gather_context(seq, spec, i, ctx);
    model->update(ctx, seq.symbol(spec.target.process, i));
  }
  return model;
}

namespace {

void sort_context(std::vector<VariableSelector>& sels) {
  std::sort(sels.begin(), sels.end(),
            [](const VariableSelector& a, const VariableSelector& b) {
              if (a.lag != b.lag) return a.lag < b.lag;
              return static_cast<int>(a.process) < static_cast<int>(b.process);
            });
}

}  // namespace

ContextSpec tdi_full_context(const AlphabetSpec& alphabet, int k) {
  if (k < 1) throw SelectorError("tdi context: k must be >= 1");
  ContextSpec spec;
  for (int lag = 1; lag <= k; ++lag) spec.context.push_back({Process::X, lag});
  for (int lag = 0; lag <= k; ++lag) spec.context.push_back({Process::Y, lag});
  if (alphabet.z_size > 1) {
    for (int lag = 0; lag <= k; ++lag) spec.context.push_back({Process::Z, lag});
  }
  sort_context(spec.context);
  return spec;
}

ContextSpec tdi_restricted_context(const AlphabetSpec& alphabet, int k) {
  if (k < 1) throw SelectorError("tdi context: k must be >= 1");
  ContextSpec spec;
  for (int lag = 1; lag <= k; ++lag) spec.context.push_back({Process::X, lag});
  if (alphabet.z_size > 1) {
    for (int lag = 0; lag <= k; ++lag) spec.context.push_back({Process::Z, lag});
  }
  sort_context(spec.context);
  return spec;
}

ContextSpec pdi_full_context(const AlphabetSpec& alphabet, int d) {
  if (d < 1) throw SelectorError("pdi context: order must be >= 1");
  ContextSpec spec;
  for (int lag = 1; lag <= d; ++lag) spec.context.push_back({Process::X, lag});
  for (int lag = 0; lag <= d; ++lag) spec.context.push_back({Process::Y, lag});
  if (alphabet.z_size > 1) {
    for (int lag = 0; lag <= d; ++lag) spec.context.push_back({Process::Z, lag});
  }
  sort_context(spec.context);
  return spec;
}

ContextSpec pdi_restricted_context(const AlphabetSpec& alphabet, int k, int d) {
  if (k < 1 || d < 1) throw SelectorError("pdi context: k and order must be >= 1");
  ContextSpec spec;
  for (int lag = 1; lag <= k + d; ++lag) spec.context.push_back({Process::X, lag});
  for (int lag = k + 1; lag <= k + d; ++lag) spec.context.push_back({Process::Y, lag});
  if (alphabet.z_size > 1) {
    for (int lag = 0; lag <= k + d; ++lag) spec.context.push_back({Process::Z, lag});
  }
  sort_context(spec.context);
  return spec;
}

long recommended_min_samples(const AlphabetSpec& alphabet,
                             const ContextSpec& spec) {
  long cells = 1;
  for (const auto& s : spec.context) cells *= alphabet.size(s.process);
  return 100 * cells;
}

double predictive_divergence(const SampleSequence& seq,
                             const PredictiveModel& full,
                             const PredictiveModel& restricted) {
  if (full.target_size() != restricted.target_size() ||
      !(full.spec().target == restricted.spec().target)) {
    throw SelectorError("predictive_divergence: mismatched targets");
  }
  long start = std::max(full.spec().max_lag(), restricted.spec().max_lag());
  if (seq.size() <= start) {
    throw EmptySequenceError("predictive_divergence: no usable positions");
  }
  int m = full.target_size();

  // Predictions are functions of the context alone, and contexts repeat
  // heavily, so memoize per distinct context code.
  struct Cache {
    const PredictiveModel& model;
    const AlphabetSpec& alphabet;
    std::vector<int> radix;
    long cells = 1;
    std::vector<std::int32_t> slot;
    std::unordered_map<long, std::int32_t> sparse;
    std::vector<double> preds;
    bool dense = false;

    Cache(const PredictiveModel& pm, const AlphabetSpec& a)
        : model(pm), alphabet(a) {
      for (const auto& s : pm.spec().context) {
        int r = a.size(s.process);
        radix.push_back(r);
        if (cells <= (1L << 22)) cells *= r;
      }
      dense = cells <= (1L << 22);
      if (dense) slot.assign(cells, -1);
    }

    std::span<const double> lookup(std::span<const int> ctx, int m) {
      long code = 0;
      for (std::size_t q = 0; q < radix.size(); ++q) {
        code = code * radix[q] + ctx[q];
      }
      std::int32_t s;
      if (dense) {
        s = slot[code];
      } else {
        auto it = sparse.find(code);
        s = it == sparse.end() ? -1 : it->second;
      }
      if (s < 0) {
        s = static_cast<std::int32_t>(preds.size() / m);
        preds.resize(preds.size() + m);
        model.predict(ctx, std::span<double>(preds.data() + s * m, m));
        if (dense) {
          slot[code] = s;
        } else {
          sparse.emplace(code, s);
        }
      }
      return std::span<const double>(preds.data() + s * m, m);
    }
  };

  Cache full_cache(full, seq.alphabet);
  Cache restr_cache(restricted, seq.alphabet);

  std::vector<int> fctx(full.spec().context.size());
  std::vector<int> rctx(restricted.spec().context.size());
  double acc = 0.0;
  long used = 0;
  for (long i = start; i < seq.size(); ++i) {
    gather_context(seq, full.spec(), i, fctx);
    gather_context(seq, restricted.spec(), i, rctx);
    auto qf = full_cache.lookup(fctx, m);
    auto qr = restr_cache.lookup(rctx, m);
    double term = 0.0;
    for (int a = 0; a < m; ++a) {
      term += qf[a] * std::log2(qf[a] / qr[a]);
    }
    acc += std::max(term, 0.0);
    ++used;
  }
  return acc / static_cast<double>(used);
}

namespace {

double estimate_rate(const SampleSequence& seq, const ContextSpec& full_spec,
                     const ContextSpec& restr_spec, EstimatorKind kind) {
  if (seq.size() == 0) throw EmptySequenceError("estimate: empty sequence");
  std::unique_ptr<PredictiveModel> full, restr;
  if (kind == EstimatorKind::PlugIn) {
    full = fit_plugin(seq, full_spec);
    restr = fit_plugin(seq, restr_spec);
  } else {
    full = fit_ctw(seq, full_spec, static_cast<int>(full_spec.context.size()));
    restr = fit_ctw(seq, restr_spec, static_cast<int>(restr_spec.context.size()));
  }
  return predictive_divergence(seq, *full, *restr);
}

}  // namespace

double estimate_tdi(const SampleSequence& seq, int k, EstimatorKind kind) {
  return estimate_rate(seq, tdi_full_context(seq.alphabet, k),
                       tdi_restricted_context(seq.alphabet, k), kind);
}

double estimate_pdi(const SampleSequence& seq, int k, int d,
                    EstimatorKind kind) {
  return estimate_rate(seq, pdi_full_context(seq.alphabet, d),
                       pdi_restricted_context(seq.alphabet, k, d), kind);
}

}  // namespace dinfo
