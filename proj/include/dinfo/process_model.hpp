#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dinfo/errors.hpp"

namespace dinfo {

// Three jointly stationary finite-alphabet processes. X is the target whose
// predictability is being measured, Y the candidate influence, Z the side
// information. A model of order d gives each process a transition kernel
// conditioned on the joint d-step past, and the three current symbols are
// drawn independently given that past.
//
// Integer encodings used throughout:
//   joint symbol   j = (x * |Y| + y) * |Z| + z
//   window code    (steps t = 1..L)  w = sum_t j_t * S^(L-t), S = |X||Y||Z|;
//                  step 1 occupies the most significant digit, so appending a
//                  step is w*S + j and dropping the newest step is w / S
//   lifted state   window code of the most recent d steps (oldest digit most
//                  significant); the shift map is s' = (s mod S^(d-1))*S + j
//   kernel context mixed-radix over per-process lag blocks: all X lags
//                  (lag 1 first), then Y lags, then Z lags

enum class Process : int { X = 0, Y = 1, Z = 2 };

const char* process_name(Process p);

struct AlphabetSpec {
  int x_size = 2;
  int y_size = 2;
  int z_size = 1;

  int size(Process p) const {
    switch (p) {
      case Process::X: return x_size;
      case Process::Y: return y_size;
      default: return z_size;
    }
  }
  long joint_size() const {
    return static_cast<long>(x_size) * y_size * z_size;
  }
  void validate() const;  // throws ShapeError

  bool operator==(const AlphabetSpec&) const = default;
};

// Which (source process, lag) pairs each target kernel may depend on.
class StructureTemplate {
 public:
  explicit StructureTemplate(int max_lag, std::string name = "");

  void allow(Process target, Process source, int lag);
  bool allowed(Process target, Process source, int lag) const;
  int max_lag() const { return max_lag_; }
  // Largest lag actually used by any edge (0 when the template is empty).
  int max_used_lag() const;
  const std::string& name() const { return name_; }

  // Benchmark structures. s1..s3 have order 1, s4 order 2; Z is left
  // unconditioned (i.i.d.) in all of them.
  //   s1: X <- {Y@1},          Y <- {Y@1}
  //   s2: X <- {X@1, Y@1},     Y <- {Y@1}
  //   s3: X <- {X@1, Y@1},     Y <- {X@1, Y@1}
  //   s4: X,Y <- {X@1, X@2, Y@1, Y@2}
  static StructureTemplate preset(const std::string& name);
  // Every (source, lag) pair allowed for every target.
  static StructureTemplate full(int order, bool include_z);

  bool operator==(const StructureTemplate&) const = default;

 private:
  int max_lag_;
  std::string name_;
  // [target][source][lag-1]
  std::vector<std::uint8_t> bits_;
  std::size_t bit_index(Process t, Process s, int lag) const;
};

class TransitionModel {
 public:
  // Kernels are row-major (context, symbol); each row a distribution over the
  // target alphabet. Throws ShapeError / NormalizationError.
  TransitionModel(AlphabetSpec alphabet, int order, std::vector<double> kernel_x,
                  std::vector<double> kernel_y, std::vector<double> kernel_z);

  const AlphabetSpec& alphabet() const { return alphabet_; }
  int order() const { return order_; }
  long context_count() const { return context_count_; }

  std::span<const double> row(Process p, long context) const;
  const std::vector<double>& kernel(Process p) const;

  // Context from per-process lag values; lags[i] is the symbol at lag i+1.
  long context_index(std::span<const int> x_lags, std::span<const int> y_lags,
                     std::span<const int> z_lags) const;
  // Context of a lifted state (the last d joint symbols).
  long context_of_lifted(long lifted) const;

  long lifted_state_count() const { return lifted_count_; }
  long lifted_shift(long lifted, long joint_symbol) const {
    return (lifted % shift_mod_) * alphabet_.joint_size() + joint_symbol;
  }
  // Probability of emitting joint symbol j from lifted state s.
  double joint_step_prob(long lifted, long joint_symbol) const;

  void decompose_joint(long joint_symbol, int& x, int& y, int& z) const;

  bool strictly_positive() const;

  static constexpr double kRowSumTolerance = 1e-12;

 private:
  AlphabetSpec alphabet_;
  int order_;
  long context_count_;
  long lifted_count_;
  long shift_mod_;
  std::array<std::vector<double>, 3> kernels_;
  std::vector<long> lifted_context_;  // lifted state -> kernel context
};

struct ValidationReport {
  double max_row_deviation = 0.0;
  double min_probability = 0.0;
  bool strictly_positive = false;
  long free_parameters = 0;
};

// Recomputes shape and normalization checks on the stored kernels and reports
// positivity. Throws on violation.
ValidationReport validate_model(const TransitionModel& model);

// Number of free kernel parameters for a given alphabet and order.
long free_parameter_count(const AlphabetSpec& alphabet, int order);

// Draws each admissible kernel row uniformly from the probability simplex
// (i.i.d. unit exponentials, normalized). Rows are constant across context
// coordinates the template masks out. Throws MaskError if the template uses
// lags beyond `order`.
TransitionModel sample_structured_model(const StructureTemplate& tmpl,
                                        const AlphabetSpec& alphabet, int order,
                                        std::uint64_t seed);

struct LiftedMatrix {
  long size = 0;
  std::vector<double> probs;  // row-major, size x size
  double at(long from, long to) const { return probs[from * size + to]; }
};

// Dense one-step transition matrix of the lifted chain over d-step windows.
// Guarded by a cell cap since the matrix is quadratic in the state count.
LiftedMatrix lifted_transition_matrix(const TransitionModel& model,
                                      long max_cells = 100000000L);

struct StationaryOptions {
  // Skip the irreducibility/aperiodicity check for models with zero kernel
  // entries whose ergodicity the caller has verified externally.
  bool assume_ergodic = false;
  double residual_tolerance = 1e-10;
  long max_power_iterations = 1000000;
};

struct StationaryDistribution {
  int order = 0;
  AlphabetSpec alphabet;
  std::vector<double> probs;  // over lifted state codes
  double residual = 0.0;      // max_s |pi(s) - (pi A)(s)| at construction
};

// Unique stationary law of the lifted chain. Strictly positive kernels make
// the chain ergodic; otherwise an explicit strong-connectivity and period
// check runs first (ReducibleChainError on failure). Direct linear solve with
// a power-iteration fallback; ConvergenceError if neither reaches tolerance.
StationaryDistribution stationary_distribution(
    const TransitionModel& model, const StationaryOptions& options = {});

// Exact stationary law of an L-step window, sparse over window codes.
class WindowDistribution {
 public:
  WindowDistribution(AlphabetSpec alphabet, int length,
                     std::vector<std::pair<std::uint64_t, double>> entries);

  const AlphabetSpec& alphabet() const { return alphabet_; }
  int length() const { return length_; }
  const std::vector<std::pair<std::uint64_t, double>>& entries() const {
    return entries_;
  }
  double total_mass() const;

  // Symbol of process p at the given lag (0 = newest step) in a window code.
  int symbol_at(std::uint64_t code, Process p, int lag) const;

  // Distribution of the window shortened by one step (newest step dropped).
  WindowDistribution drop_newest() const;

 private:
  AlphabetSpec alphabet_;
  int length_;
  std::vector<std::pair<std::uint64_t, double>> entries_;
};

// Stationary window law obtained by seeding with the stationary distribution
// and unrolling the kernels L-d times. Requires L >= d. Probabilities below
// 1e-300 are dropped. SizeError if the dense window count S^L exceeds
// `max_cells`.
WindowDistribution window_distribution(const TransitionModel& model, int length,
                                       long max_cells = 100000000L);

struct SampleSequence {
  AlphabetSpec alphabet;
  std::uint64_t seed = 0;
  std::vector<int> x, y, z;

  long size() const { return static_cast<long>(x.size()); }
  int symbol(Process p, long t) const {
    switch (p) {
      case Process::X: return x[t];
      case Process::Y: return y[t];
      default: return z[t];
    }
  }
};

// Joint sample path of length n: the first d steps are drawn from the
// stationary law, then each step draws X, Y, Z independently given the joint
// d-past (in that order, one uniform each).
SampleSequence sample_sequence(const TransitionModel& model, long n,
                               std::uint64_t seed);

}  // namespace dinfo
