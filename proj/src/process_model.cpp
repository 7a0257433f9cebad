#include "dinfo/process_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "dinfo/rng.hpp"

namespace dinfo {

namespace {

constexpr double kZeroFloor = 1e-300;

long checked_pow(long base, int exp, long limit, const char* what) {
  long v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > limit / base) throw SizeError(std::string(what) + ": table too large");
    v *= base;
  }
  return v;
}

void check_distribution_row(std::span<const double> row, const std::string& where) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0)) {
      throw NormalizationError(where + ": negative or NaN probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > TransitionModel::kRowSumTolerance) {
    throw NormalizationError(where + ": row sums to " + std::to_string(sum));
  }
}

}  // namespace

const char* process_name(Process p) {
  switch (p) {
    case Process::X: return "X";
    case Process::Y: return "Y";
    default: return "Z";
  }
}

void AlphabetSpec::validate() const {
  if (x_size < 2 || y_size < 2) {
    throw ShapeError("alphabet: |X| and |Y| must be at least 2");
  }
  if (z_size < 1) throw ShapeError("alphabet: |Z| must be at least 1");
}

StructureTemplate::StructureTemplate(int max_lag, std::string name)
    : max_lag_(max_lag), name_(std::move(name)) {
  if (max_lag < 1) throw MaskError("template: max lag must be at least 1");
  bits_.assign(static_cast<std::size_t>(9) * max_lag, 0);
}

std::size_t StructureTemplate::bit_index(Process t, Process s, int lag) const {
  return (static_cast<std::size_t>(t) * 3 + static_cast<std::size_t>(s)) *
             max_lag_ +
         (lag - 1);
}

void StructureTemplate::allow(Process target, Process source, int lag) {
  if (lag < 1 || lag > max_lag_) {
    throw MaskError("template: lag " + std::to_string(lag) + " out of range");
  }
  bits_[bit_index(target, source, lag)] = 1;
}

bool StructureTemplate::allowed(Process target, Process source, int lag) const {
  if (lag < 1 || lag > max_lag_) return false;
  return bits_[bit_index(target, source, lag)] != 0;
}

int StructureTemplate::max_used_lag() const {
  int m = 0;
  for (int t = 0; t < 3; ++t) {
    for (int s = 0; s < 3; ++s) {
      for (int lag = 1; lag <= max_lag_; ++lag) {
        if (allowed(static_cast<Process>(t), static_cast<Process>(s), lag)) {
          m = std::max(m, lag);
        }
      }
    }
  }
  return m;
}

StructureTemplate StructureTemplate::preset(const std::string& name) {
  using P = Process;
  if (name == "s1") {
    StructureTemplate t(1, "s1");
    t.allow(P::X, P::Y, 1);
    t.allow(P::Y, P::Y, 1);
    return t;
  }
  if (name == "s2") {
    StructureTemplate t(1, "s2");
    t.allow(P::X, P::X, 1);
    t.allow(P::X, P::Y, 1);
    t.allow(P::Y, P::Y, 1);
    return t;
  }
  if (name == "s3") {
    StructureTemplate t(1, "s3");
    t.allow(P::X, P::X, 1);
    t.allow(P::X, P::Y, 1);
    t.allow(P::Y, P::X, 1);
    t.allow(P::Y, P::Y, 1);
    return t;
  }
  if (name == "s4") {
    StructureTemplate t(2, "s4");
    for (int lag = 1; lag <= 2; ++lag) {
      t.allow(P::X, P::X, lag);
      t.allow(P::X, P::Y, lag);
      t.allow(P::Y, P::X, lag);
      t.allow(P::Y, P::Y, lag);
    }
    return t;
  }
  throw MaskError("unknown structure preset: " + name);
}

StructureTemplate StructureTemplate::full(int order, bool include_z) {
  StructureTemplate t(order, "full");
  for (int ti = 0; ti < 3; ++ti) {
    if (!include_z && ti == 2) continue;
    for (int si = 0; si < 3; ++si) {
      if (!include_z && si == 2) continue;
      for (int lag = 1; lag <= order; ++lag) {
        t.allow(static_cast<Process>(ti), static_cast<Process>(si), lag);
      }
    }
  }
  return t;
}

TransitionModel::TransitionModel(AlphabetSpec alphabet, int order,
                                 std::vector<double> kernel_x,
                                 std::vector<double> kernel_y,
                                 std::vector<double> kernel_z)
    : alphabet_(alphabet), order_(order) {
  alphabet_.validate();
  if (order_ < 1) throw ShapeError("model: order must be at least 1");
  long joint = alphabet_.joint_size();
  context_count_ = checked_pow(joint, order_, 1L << 40, "model contexts");
  lifted_count_ = context_count_;
  shift_mod_ = checked_pow(joint, order_ - 1, 1L << 40, "lifted shift");

  kernels_[0] = std::move(kernel_x);
  kernels_[1] = std::move(kernel_y);
  kernels_[2] = std::move(kernel_z);
  for (int pi = 0; pi < 3; ++pi) {
    Process p = static_cast<Process>(pi);
    long m = alphabet_.size(p);
    const auto& k = kernels_[pi];
    if (static_cast<long>(k.size()) != context_count_ * m) {
      throw ShapeError(std::string("kernel ") + process_name(p) +
                       ": expected " + std::to_string(context_count_ * m) +
                       " entries, got " + std::to_string(k.size()));
    }
    for (long c = 0; c < context_count_; ++c) {
      check_distribution_row(std::span<const double>(k.data() + c * m, m),
                             std::string("kernel ") + process_name(p) +
                                 " context " + std::to_string(c));
    }
  }

  // Map each lifted state to its kernel context: the lifted code stores joint
  // symbols oldest first, while contexts group digits per process with lag 1
  // leading.
  lifted_context_.resize(lifted_count_);
  std::vector<int> xs(order_), ys(order_), zs(order_);
  for (long s = 0; s < lifted_count_; ++s) {
    long rem = s;
    for (int t = order_; t >= 1; --t) {  // t = step index, 1 = oldest
      long j = rem % joint;
      rem /= joint;
      int lag = order_ - t + 1;
      decompose_joint(j, xs[lag - 1], ys[lag - 1], zs[lag - 1]);
    }
    lifted_context_[s] = context_index(xs, ys, zs);
  }
}

std::span<const double> TransitionModel::row(Process p, long context) const {
  long m = alphabet_.size(p);
  const auto& k = kernels_[static_cast<int>(p)];
  return std::span<const double>(k.data() + context * m, m);
}

const std::vector<double>& TransitionModel::kernel(Process p) const {
  return kernels_[static_cast<int>(p)];
}

long TransitionModel::context_index(std::span<const int> x_lags,
                                    std::span<const int> y_lags,
                                    std::span<const int> z_lags) const {
  if (static_cast<int>(x_lags.size()) != order_ ||
      static_cast<int>(y_lags.size()) != order_ ||
      static_cast<int>(z_lags.size()) != order_) {
    throw ShapeError("context_index: need exactly `order` lags per process");
  }
  long idx = 0;
  for (int lag = 1; lag <= order_; ++lag) idx = idx * alphabet_.x_size + x_lags[lag - 1];
  for (int lag = 1; lag <= order_; ++lag) idx = idx * alphabet_.y_size + y_lags[lag - 1];
  for (int lag = 1; lag <= order_; ++lag) idx = idx * alphabet_.z_size + z_lags[lag - 1];
  return idx;
}

long TransitionModel::context_of_lifted(long lifted) const {
  return lifted_context_[lifted];
}

double TransitionModel::joint_step_prob(long lifted, long joint_symbol) const {
  long ctx = lifted_context_[lifted];
  int x, y, z;
  decompose_joint(joint_symbol, x, y, z);
  return row(Process::X, ctx)[x] * row(Process::Y, ctx)[y] *
         row(Process::Z, ctx)[z];
}

void TransitionModel::decompose_joint(long joint_symbol, int& x, int& y,
                                      int& z) const {
  z = static_cast<int>(joint_symbol % alphabet_.z_size);
  long rest = joint_symbol / alphabet_.z_size;
  y = static_cast<int>(rest % alphabet_.y_size);
  x = static_cast<int>(rest / alphabet_.y_size);
}

bool TransitionModel::strictly_positive() const {
  for (const auto& k : kernels_) {
    for (double p : k) {
      if (p <= 0.0) return false;
    }
  }
  return true;
}

ValidationReport validate_model(const TransitionModel& model) {
  ValidationReport report;
  report.min_probability = 1.0;
  for (int pi = 0; pi < 3; ++pi) {
    Process p = static_cast<Process>(pi);
    for (long c = 0; c < model.context_count(); ++c) {
      auto r = model.row(p, c);
      double sum = 0.0;
      for (double v : r) {
        if (!(v >= 0.0)) {
          throw NormalizationError("validate: negative probability");
        }
        sum += v;
        report.min_probability = std::min(report.min_probability, v);
      }
      double dev = std::abs(sum - 1.0);
      report.max_row_deviation = std::max(report.max_row_deviation, dev);
      if (dev > TransitionModel::kRowSumTolerance) {
        throw NormalizationError(
            std::string("validate: kernel ") + process_name(p) + " context " +
            std::to_string(c) + " sums to " + std::to_string(sum));
      }
    }
  }
  report.strictly_positive = report.min_probability > 0.0;
  report.free_parameters =
      free_parameter_count(model.alphabet(), model.order());
  return report;
}

long free_parameter_count(const AlphabetSpec& alphabet, int order) {
  long contexts = 1;
  for (int i = 0; i < order; ++i) contexts *= alphabet.joint_size();
  return contexts *
         (alphabet.x_size + alphabet.y_size + alphabet.z_size - 3);
}

TransitionModel sample_structured_model(const StructureTemplate& tmpl,
                                        const AlphabetSpec& alphabet, int order,
                                        std::uint64_t seed) {
  alphabet.validate();
  if (order < 1) throw ShapeError("sample_structured_model: order must be >= 1");
  if (tmpl.max_used_lag() > order) {
    throw MaskError("template uses lag " + std::to_string(tmpl.max_used_lag()) +
                    " but model order is " + std::to_string(order));
  }

  long joint = alphabet.joint_size();
  long contexts = checked_pow(joint, order, 1L << 40, "model contexts");

  // Digit of the (source, lag) coordinate within a full context index. The
  // context is a mixed-radix number over 3*order digits: the X block first
  // (lag 1 leading), then the Y block, then the Z block.
  auto digit = [&](long ctx, Process src, int lag) -> int {
    int pos = static_cast<int>(src) * order + (lag - 1);
    long stride = 1;
    for (int q = 3 * order - 1; q > pos; --q) {
      stride *= alphabet.size(static_cast<Process>(q / order));
    }
    return static_cast<int>((ctx / stride) % alphabet.size(src));
  };

  Rng rng(seed);
  std::array<std::vector<double>, 3> kernels;
  for (int pi = 0; pi < 3; ++pi) {
    Process target = static_cast<Process>(pi);
    long m = alphabet.size(target);

    // Coordinates the kernel may depend on, in canonical order.
    std::vector<std::pair<Process, int>> coords;
    for (int si = 0; si < 3; ++si) {
      for (int lag = 1; lag <= order; ++lag) {
        if (tmpl.allowed(target, static_cast<Process>(si), lag)) {
          coords.emplace_back(static_cast<Process>(si), lag);
        }
      }
    }
    long reduced = 1;
    for (auto& [src, lag] : coords) (void)lag, reduced *= alphabet.size(src);

    std::vector<double> rows(reduced * m);
    for (long rc = 0; rc < reduced; ++rc) {
      double* row = rows.data() + rc * m;
      if (m == 1) {
        row[0] = 1.0;
        continue;
      }
      double sum = 0.0;
      for (long a = 0; a < m; ++a) {
        row[a] = rng.unit_exponential();
        sum += row[a];
      }
      for (long a = 0; a < m; ++a) row[a] /= sum;
    }

    std::vector<double>& k = kernels[pi];
    k.resize(contexts * m);
    for (long c = 0; c < contexts; ++c) {
      long rc = 0;
      for (auto& [src, lag] : coords) {
        rc = rc * alphabet.size(src) + digit(c, src, lag);
      }
      std::copy_n(rows.data() + rc * m, m, k.data() + c * m);
    }
  }

  return TransitionModel(alphabet, order, std::move(kernels[0]),
                         std::move(kernels[1]), std::move(kernels[2]));
}

LiftedMatrix lifted_transition_matrix(const TransitionModel& model,
                                      long max_cells) {
  long m = model.lifted_state_count();
  if (m > max_cells / m) {
    throw SizeError("lifted_transition_matrix: " + std::to_string(m) + "^2 cells");
  }
  LiftedMatrix a;
  a.size = m;
  a.probs.assign(m * m, 0.0);
  long joint = model.alphabet().joint_size();
  for (long s = 0; s < m; ++s) {
    for (long j = 0; j < joint; ++j) {
      a.probs[s * m + model.lifted_shift(s, j)] += model.joint_step_prob(s, j);
    }
  }
  return a;
}

namespace {

// Support-graph ergodicity check: one strongly connected component and
// aperiodicity via the gcd of BFS level differences.
void check_ergodic(const TransitionModel& model) {
  long m = model.lifted_state_count();
  long joint = model.alphabet().joint_size();
  auto successors = [&](long s, auto&& fn) {
    for (long j = 0; j < joint; ++j) {
      if (model.joint_step_prob(s, j) > 0.0) fn(model.lifted_shift(s, j));
    }
  };

  // Forward reachability from state 0.
  std::vector<char> fwd(m, 0);
  std::vector<long> stack{0};
  fwd[0] = 1;
  while (!stack.empty()) {
    long s = stack.back();
    stack.pop_back();
    successors(s, [&](long t) {
      if (!fwd[t]) {
        fwd[t] = 1;
        stack.push_back(t);
      }
    });
  }
  // Backward reachability needs the reverse adjacency.
  std::vector<std::vector<long>> rev(m);
  for (long s = 0; s < m; ++s) {
    successors(s, [&](long t) { rev[t].push_back(s); });
  }
  std::vector<char> bwd(m, 0);
  stack.assign(1, 0);
  bwd[0] = 1;
  while (!stack.empty()) {
    long s = stack.back();
    stack.pop_back();
    for (long t : rev[s]) {
      if (!bwd[t]) {
        bwd[t] = 1;
        stack.push_back(t);
      }
    }
  }
  for (long s = 0; s < m; ++s) {
    if (!fwd[s] || !bwd[s]) {
      throw ReducibleChainError("lifted chain is not irreducible");
    }
  }

  // Period = gcd of level[u] + 1 - level[v] over edges u -> v.
  std::vector<long> level(m, -1);
  std::queue<long> q;
  q.push(0);
  level[0] = 0;
  long period = 0;
  while (!q.empty()) {
    long s = q.front();
    q.pop();
    successors(s, [&](long t) {
      if (level[t] < 0) {
        level[t] = level[s] + 1;
        q.push(t);
      } else {
        period = std::gcd(period, std::abs(level[s] + 1 - level[t]));
      }
    });
  }
  if (period != 1) {
    throw ReducibleChainError("lifted chain has period " +
                              std::to_string(period));
  }
}

double stationary_residual(const TransitionModel& model,
                           const std::vector<double>& pi) {
  long m = model.lifted_state_count();
  long joint = model.alphabet().joint_size();
  std::vector<double> forward(m, 0.0);
  for (long s = 0; s < m; ++s) {
    if (pi[s] == 0.0) continue;
    for (long j = 0; j < joint; ++j) {
      forward[model.lifted_shift(s, j)] += pi[s] * model.joint_step_prob(s, j);
    }
  }
  double r = 0.0;
  for (long s = 0; s < m; ++s) r = std::max(r, std::abs(forward[s] - pi[s]));
  return r;
}

bool power_iteration(const TransitionModel& model, std::vector<double>& pi,
                     double tol, long max_iter) {
  long m = model.lifted_state_count();
  long joint = model.alphabet().joint_size();
  std::vector<double> next(m);
  pi.assign(m, 1.0 / static_cast<double>(m));
  for (long it = 0; it < max_iter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (long s = 0; s < m; ++s) {
      if (pi[s] == 0.0) continue;
      for (long j = 0; j < joint; ++j) {
        next[model.lifted_shift(s, j)] += pi[s] * model.joint_step_prob(s, j);
      }
    }
    double delta = 0.0;
    for (long s = 0; s < m; ++s) delta = std::max(delta, std::abs(next[s] - pi[s]));
    pi.swap(next);
    if (delta <= tol * 0.1) return true;
  }
  return false;
}

}  // namespace

StationaryDistribution stationary_distribution(const TransitionModel& model,
                                               const StationaryOptions& options) {
  if (!model.strictly_positive() && !options.assume_ergodic) {
    check_ergodic(model);
  }

  long m = model.lifted_state_count();
  std::vector<double> pi;

  bool solved = false;
  if (m <= 2048) {
    // pi A = pi with a normalization row in place of the last (redundant)
    // balance equation.
    LiftedMatrix a = lifted_transition_matrix(model);
    Eigen::MatrixXd b(m, m);
    for (long i = 0; i < m; ++i) {
      for (long j = 0; j < m; ++j) {
        b(i, j) = a.at(j, i) - (i == j ? 1.0 : 0.0);
      }
    }
    for (long j = 0; j < m; ++j) b(m - 1, j) = 1.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    Eigen::VectorXd sol = b.colPivHouseholderQr().solve(rhs);

    pi.resize(m);
    bool sane = true;
    for (long s = 0; s < m; ++s) {
      double v = sol(s);
      if (v < -1e-9 || !std::isfinite(v)) {
        sane = false;
        break;
      }
      pi[s] = std::max(v, 0.0);
    }
    if (sane) {
      double total = std::accumulate(pi.begin(), pi.end(), 0.0);
      if (total > 0.0) {
        for (double& v : pi) v /= total;
        solved = stationary_residual(model, pi) <= options.residual_tolerance;
      }
    }
  }

  if (!solved) {
    if (!power_iteration(model, pi, options.residual_tolerance,
                         options.max_power_iterations)) {
      throw ConvergenceError("stationary distribution: power iteration did not converge");
    }
  }

  StationaryDistribution dist;
  dist.order = model.order();
  dist.alphabet = model.alphabet();
  dist.residual = stationary_residual(model, pi);
  dist.probs = std::move(pi);
  if (dist.residual > options.residual_tolerance) {
    throw ConvergenceError("stationary distribution residual " +
                           std::to_string(dist.residual));
  }
  return dist;
}

WindowDistribution::WindowDistribution(
    AlphabetSpec alphabet, int length,
    std::vector<std::pair<std::uint64_t, double>> entries)
    : alphabet_(alphabet), length_(length), entries_(std::move(entries)) {}

double WindowDistribution::total_mass() const {
  double s = 0.0;
  for (const auto& [code, p] : entries_) s += p;
  return s;
}

int WindowDistribution::symbol_at(std::uint64_t code, Process p, int lag) const {
  if (lag < 0 || lag >= length_) throw SelectorError("symbol_at: lag out of window");
  std::uint64_t joint = static_cast<std::uint64_t>(alphabet_.joint_size());
  std::uint64_t j = code;
  for (int i = 0; i < lag; ++i) j /= joint;
  j %= joint;
  int x, y, z;
  z = static_cast<int>(j % alphabet_.z_size);
  std::uint64_t rest = j / alphabet_.z_size;
  y = static_cast<int>(rest % alphabet_.y_size);
  x = static_cast<int>(rest / alphabet_.y_size);
  switch (p) {
    case Process::X: return x;
    case Process::Y: return y;
    default: return z;
  }
}

WindowDistribution WindowDistribution::drop_newest() const {
  if (length_ < 2) throw ShapeError("drop_newest: window too short");
  std::uint64_t joint = static_cast<std::uint64_t>(alphabet_.joint_size());
  std::vector<std::pair<std::uint64_t, double>> out;
  out.reserve(entries_.size() / joint + 1);
  for (const auto& [code, p] : entries_) {
    std::uint64_t shorter = code / joint;
    if (!out.empty() && out.back().first == shorter) {
      out.back().second += p;
    } else {
      out.emplace_back(shorter, p);
    }
  }
  return WindowDistribution(alphabet_, length_ - 1, std::move(out));
}

WindowDistribution window_distribution(const TransitionModel& model, int length,
                                       long max_cells) {
  int d = model.order();
  if (length < d) {
    throw ShapeError("window_distribution: length must be at least the order");
  }
  long joint = model.alphabet().joint_size();
  checked_pow(joint, length, max_cells, "window_distribution");

  StationaryDistribution pi = stationary_distribution(model);

  std::vector<std::pair<std::uint64_t, double>> entries;
  for (long s = 0; s < model.lifted_state_count(); ++s) {
    if (pi.probs[s] >= kZeroFloor) {
      entries.emplace_back(static_cast<std::uint64_t>(s), pi.probs[s]);
    }
  }

  std::vector<std::pair<std::uint64_t, double>> next;
  for (int t = d + 1; t <= length; ++t) {
    next.clear();
    next.reserve(entries.size() * joint);
    std::uint64_t lift_mod = 1;
    for (int i = 0; i < d; ++i) lift_mod *= joint;
    for (const auto& [code, p] : entries) {
      long s = static_cast<long>(code % lift_mod);
      for (long j = 0; j < joint; ++j) {
        double q = p * model.joint_step_prob(s, j);
        if (q >= kZeroFloor) {
          next.emplace_back(code * joint + j, q);
        }
      }
    }
    entries.swap(next);
  }

  return WindowDistribution(model.alphabet(), length, std::move(entries));
}

SampleSequence sample_sequence(const TransitionModel& model, long n,
                               std::uint64_t seed) {
  SampleSequence seq;
  seq.alphabet = model.alphabet();
  seq.seed = seed;
  if (n <= 0) return seq;
  seq.x.resize(n);
  seq.y.resize(n);
  seq.z.resize(n);

  Rng rng(seed);
  StationaryDistribution pi = stationary_distribution(model);
  long s = rng.categorical(pi.probs);

  int d = model.order();
  long joint = model.alphabet().joint_size();
  // Unpack the initial block, oldest digit first.
  {
    long rem = s;
    std::vector<long> js(d);
    for (int t = d - 1; t >= 0; --t) {
      js[t] = rem % joint;
      rem /= joint;
    }
    for (int t = 0; t < d && t < n; ++t) {
      int x, y, z;
      model.decompose_joint(js[t], x, y, z);
      seq.x[t] = x;
      seq.y[t] = y;
      seq.z[t] = z;
    }
  }

  for (long t = d; t < n; ++t) {
    long ctx = model.context_of_lifted(s);
    int x = rng.categorical(model.row(Process::X, ctx));
    int y = rng.categorical(model.row(Process::Y, ctx));
    int z = rng.categorical(model.row(Process::Z, ctx));
    seq.x[t] = x;
    seq.y[t] = y;
    seq.z[t] = z;
    long j = (static_cast<long>(x) * model.alphabet().y_size + y) *
                 model.alphabet().z_size +
             z;
    s = model.lifted_shift(s, j);
  }
  return seq;
}

}  // namespace dinfo
