#pragma once

#include <string>
#include <vector>

#include "dinfo/process_model.hpp"

namespace dinfo {

// Time-unrolled dependence network of a stationary model over a finite
// horizon. Nodes are (process, step) pairs; an edge S@(t-k) -> S'@t is
// present exactly when the source coordinate carries conditional information
// about the target given the rest of the joint d-past, so the edge set is the
// same at every step and only lags 1..d occur. A degenerate side alphabet
// (|Z| = 1) leaves Z out of the network entirely.

struct TimeNode {
  Process process = Process::X;
  int time = 1;  // 1-based

  bool operator==(const TimeNode&) const = default;
};

struct TemplateEdge {
  Process source = Process::X;
  int lag = 1;
  Process target = Process::X;

  bool operator==(const TemplateEdge&) const = default;
};

class TimeNetwork {
 public:
  TimeNetwork(AlphabetSpec alphabet, int order, int horizon,
              std::vector<TemplateEdge> edges);

  const AlphabetSpec& alphabet() const { return alphabet_; }
  int order() const { return order_; }
  int horizon() const { return horizon_; }
  bool process_active(Process p) const;

  const std::vector<TemplateEdge>& template_edges() const { return edges_; }
  bool has_template_edge(Process source, int lag, Process target) const;

  // Direct predecessors of a node within the horizon.
  std::vector<TimeNode> parents(const TimeNode& node) const;
  // All unrolled edges, oldest target first.
  std::vector<std::pair<TimeNode, TimeNode>> unrolled_edges() const;

  void check_node(const TimeNode& node) const;

  std::string to_dot() const;

 private:
  AlphabetSpec alphabet_;
  int order_;
  int horizon_;
  std::vector<TemplateEdge> edges_;
};

// Recovers the edge set from exact conditional mutual informations on the
// (d+1)-step window law: an edge is declared when the CMI of source and
// target given the remaining d-past exceeds `epsilon` bits.
TimeNetwork build_time_network(const TransitionModel& model, int horizon,
                               double epsilon = 1e-10);

struct DSeparationResult {
  bool separated = false;
  // For a connected query: a path in the moralized ancestral graph from a
  // node of A to a node of B avoiding C.
  std::vector<TimeNode> witness_path;
};

// Graphical conditional-independence test: moralized ancestral subgraph,
// conditioning nodes deleted, undirected connectivity. Sets must be pairwise
// disjoint (DisjointnessError) and A, B nonempty.
DSeparationResult d_separation_query(const TimeNetwork& net,
                                     const std::vector<TimeNode>& a,
                                     const std::vector<TimeNode>& b,
                                     const std::vector<TimeNode>& c);

bool d_separated(const TimeNetwork& net, const std::vector<TimeNode>& a,
                 const std::vector<TimeNode>& b,
                 const std::vector<TimeNode>& c);

// Whether past Y values are pairwise separated given the full X and Z paths:
// checks every pair (Y_j, Y_k), j < k <= T, k - j <= T - 2d, conditioning on
// all X and Z nodes up to T. Requires T >= 4*order + 4.
bool y_pairwise_separated(const TimeNetwork& net, int anchor);

struct MarkovCertificate {
  enum class Verdict { NoInfluence, DSeparatedAtOrder, NotDSeparated };

  Verdict verdict = Verdict::NotDSeparated;
  std::vector<int> tested_l_values;
  int anchor = 0;
  // Size of the conditioning set used in the query (0 for NoInfluence).
  int conditioning_set_size = 0;
  // Connecting path when the verdict is NotDSeparated.
  std::vector<TimeNode> witness_path;
};

const char* verdict_name(MarkovCertificate::Verdict v);

// Attempts to certify that X is conditionally Markov of order l given Z once
// the Y path is dropped: queries whether (X,Z) values at lags 1..l separate
// X at the anchor from all older (X,Z) values. Models with no Y -> X edge
// short-circuit to NoInfluence. Requires anchor >= 4*order + 4 and
// l <= anchor - 2.
MarkovCertificate markov_certificate(const TimeNetwork& net, int l,
                                     int anchor = 0);

// Horizon large enough for certificates at order l.
int default_horizon(int order, int l);

}  // namespace dinfo
