#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dinfo/exact_info.hpp"
#include "dinfo/process_model.hpp"

namespace dinfo {

// Sample-path estimators of the truncated and partial rates. Both fit two
// predictive models over the same sequence, one conditioned on the full
// context and one on the restricted context, and average
//
//   sum_a Q_full(a | ctx_i) * log2( Q_full(a | ctx_i) / Q_restr(a | ctx_i) )
//
// over all usable positions i. Every term is a KL divergence between two
// strictly positive predictive laws, so the estimate is nonnegative by
// construction.

struct ContextSpec {
  std::vector<VariableSelector> context;  // root-to-leaf order
  VariableSelector target{Process::X, 0};

  int max_lag() const;
  void validate() const;  // SelectorError on duplicates or bad lags
};

enum class EstimatorKind { PlugIn, Ctw };

class PredictiveModel {
 public:
  PredictiveModel(ContextSpec spec, const AlphabetSpec& alphabet);
  virtual ~PredictiveModel() = default;

  const ContextSpec& spec() const { return spec_; }
  int target_size() const { return target_size_; }

  virtual void update(std::span<const int> context, int target) = 0;
  // Predictive law over the target alphabet; strictly positive, sums to 1.
  virtual void predict(std::span<const int> context,
                       std::span<double> out) const = 0;

 protected:
  ContextSpec spec_;
  int target_size_;
};

// Empirical-count model with add-half smoothing:
// P(a | ctx) = (count + 1/2) / (total + |A|/2). Contexts never seen predict
// uniformly.
class PlugInModel final : public PredictiveModel {
 public:
  PlugInModel(ContextSpec spec, const AlphabetSpec& alphabet,
              long max_cells = (1L << 28));

  void update(std::span<const int> context, int target) override;
  void predict(std::span<const int> context,
               std::span<double> out) const override;

  long context_cells() const { return static_cast<long>(totals_.size()); }
  std::uint32_t count(long context_code, int symbol) const;
  long encode(std::span<const int> context) const;

 private:
  std::vector<int> radix_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> totals_;
};

// Context-tree weighting over the ordered context selectors: level q of the
// tree splits on selector q, so deeper nodes condition on more coordinates.
// Each node carries add-half (KT) counts over the target alphabet; the
// weighted law mixes every pruning of the tree with prior weight 1/2 per
// internal node. Prediction is the one-step ratio of weighted sequence
// probabilities.
class CtwModel final : public PredictiveModel {
 public:
  CtwModel(ContextSpec spec, const AlphabetSpec& alphabet, int depth);

  void update(std::span<const int> context, int target) override;
  void predict(std::span<const int> context,
               std::span<double> out) const override;

  // Total weighted code length of everything seen so far, in bits.
  double weighted_code_length_bits() const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<std::uint32_t> counts;
    std::uint32_t total = 0;
    double kt_log = 0.0;        // natural log of the KT block probability
    double w_log = 0.0;         // natural log of the weighted probability
    double child_w_sum = 0.0;   // sum of children's w_log
    std::vector<std::int32_t> children;
  };

  std::vector<int> radix_;
  std::vector<Node> nodes_;

  int ensure_child(int node, int level, int value);
  double kt_step_log(const Node& node, int symbol) const;
};

std::unique_ptr<PredictiveModel> fit_plugin(const SampleSequence& seq,
                                            const ContextSpec& spec);
// `depth` must equal the number of context selectors.
std::unique_ptr<PredictiveModel> fit_ctw(const SampleSequence& seq,
                                         const ContextSpec& spec, int depth);

// Contexts for the truncated rate at order k: the restricted side sees X lags
// 1..k and Z lags 0..k, the full side adds Y lags 0..k. Selectors are ordered
// nearest lag first, X before Y before Z at equal lag; a degenerate Z
// alphabet is left out.
ContextSpec tdi_full_context(const AlphabetSpec& alphabet, int k);
ContextSpec tdi_restricted_context(const AlphabetSpec& alphabet, int k);

// Contexts for the partial rate at order k for a model of order d: the
// restricted side sees X lags 1..k+d, Y lags k+1..k+d, Z lags 0..k+d; the
// full side sees X lags 1..d, Y lags 0..d, Z lags 0..d.
ContextSpec pdi_full_context(const AlphabetSpec& alphabet, int d);
ContextSpec pdi_restricted_context(const AlphabetSpec& alphabet, int k, int d);

// Number of samples below which plug-in counts are spread too thin for the
// context space (exceeding it is advisory, not enforced).
long recommended_min_samples(const AlphabetSpec& alphabet,
                             const ContextSpec& spec);

double estimate_tdi(const SampleSequence& seq, int k, EstimatorKind kind);
double estimate_pdi(const SampleSequence& seq, int k, int d,
                    EstimatorKind kind);

// Shared core: average divergence of two fitted predictive models over the
// common usable range of the sequence.
double predictive_divergence(const SampleSequence& seq,
                             const PredictiveModel& full,
                             const PredictiveModel& restricted);

}  // namespace dinfo
