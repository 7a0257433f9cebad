#include "dinfo/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "dinfo/exact_info.hpp"

namespace dinfo {

TimeNetwork::TimeNetwork(AlphabetSpec alphabet, int order, int horizon,
                         std::vector<TemplateEdge> edges)
    : alphabet_(alphabet), order_(order), horizon_(horizon),
      edges_(std::move(edges)) {
  alphabet_.validate();
  if (order_ < 1) throw ShapeError("network: order must be >= 1");
  if (horizon_ < order_ + 1) {
    throw HorizonError("network: horizon must exceed the order");
  }
  for (const auto& e : edges_) {
    if (e.lag < 1 || e.lag > order_) {
      throw ShapeError("network: edge lag out of range");
    }
    if ((e.source == Process::Z || e.target == Process::Z) &&
        alphabet_.z_size < 2) {
      throw ShapeError("network: Z edges require |Z| >= 2");
    }
  }
}

bool TimeNetwork::process_active(Process p) const {
  return p != Process::Z || alphabet_.z_size > 1;
}

bool TimeNetwork::has_template_edge(Process source, int lag,
                                    Process target) const {
  return std::find(edges_.begin(), edges_.end(),
                   TemplateEdge{source, lag, target}) != edges_.end();
}

void TimeNetwork::check_node(const TimeNode& node) const {
  if (!process_active(node.process)) {
    throw SelectorError("network: process not present");
  }
  if (node.time < 1 || node.time > horizon_) {
    throw HorizonError("network: node time " + std::to_string(node.time) +
                       " outside horizon " + std::to_string(horizon_));
  }
}

std::vector<TimeNode> TimeNetwork::parents(const TimeNode& node) const {
  check_node(node);
  std::vector<TimeNode> out;
  for (const auto& e : edges_) {
    if (e.target == node.process && node.time - e.lag >= 1) {
      out.push_back({e.source, node.time - e.lag});
    }
  }
  return out;
}

std::vector<std::pair<TimeNode, TimeNode>> TimeNetwork::unrolled_edges() const {
  std::vector<std::pair<TimeNode, TimeNode>> out;
  for (int t = 1; t <= horizon_; ++t) {
    for (const auto& e : edges_) {
      if (t - e.lag >= 1) {
        out.push_back({{e.source, t - e.lag}, {e.target, t}});
      }
    }
  }
  return out;
}

std::string TimeNetwork::to_dot() const {
  std::ostringstream os;
  os << "digraph time_network {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (int t = 1; t <= horizon_; ++t) {
    os << "  { rank=same;";
    for (int pi = 0; pi < 3; ++pi) {
      Process p = static_cast<Process>(pi);
      if (!process_active(p)) continue;
      os << " " << process_name(p) << t << " [label=\"" << process_name(p)
         << "_" << t << "\"];";
    }
    os << " }\n";
  }
  for (const auto& [from, to] : unrolled_edges()) {
    os << "  " << process_name(from.process) << from.time << " -> "
       << process_name(to.process) << to.time << ";\n";
  }
  os << "}\n";
  return os.str();
}

TimeNetwork build_time_network(const TransitionModel& model, int horizon,
                               double epsilon) {
  int d = model.order();
  WindowDistribution w = window_distribution(model, d + 1);

  std::vector<Process> active{Process::X, Process::Y};
  if (model.alphabet().z_size > 1) active.push_back(Process::Z);

  std::vector<TemplateEdge> edges;
  for (Process target : active) {
    for (Process source : active) {
      for (int lag = 1; lag <= d; ++lag) {
        // Everything in the d-past except the candidate source coordinate.
        std::vector<VariableSelector> rest;
        for (Process p : active) {
          for (int l = 1; l <= d; ++l) {
            if (p == source && l == lag) continue;
            rest.push_back({p, l});
          }
        }
        double cmi = exact_cmi(w, {{source, lag}}, {{target, 0}}, rest);
        if (cmi > epsilon) edges.push_back({source, lag, target});
      }
    }
  }
  return TimeNetwork(model.alphabet(), d, horizon, std::move(edges));
}

namespace {

struct MoralGraph {
  const TimeNetwork& net;
  std::vector<char> ancestral;
  std::vector<char> removed;
  std::vector<std::vector<int>> adj;

  explicit MoralGraph(const TimeNetwork& n)
      : net(n),
        ancestral(3 * n.horizon(), 0),
        removed(3 * n.horizon(), 0),
        adj(3 * n.horizon()) {}

  int id(const TimeNode& v) const {
    return (v.time - 1) * 3 + static_cast<int>(v.process);
  }
  TimeNode node(int id) const {
    return {static_cast<Process>(id % 3), id / 3 + 1};
  }

  void mark_ancestral(const std::vector<TimeNode>& seeds) {
    std::vector<int> stack;
    for (const auto& v : seeds) {
      int i = id(v);
      if (!ancestral[i]) {
        ancestral[i] = 1;
        stack.push_back(i);
      }
    }
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      for (const auto& p : net.parents(node(i))) {
        int pi = id(p);
        if (!ancestral[pi]) {
          ancestral[pi] = 1;
          stack.push_back(pi);
        }
      }
    }
  }

  void link(int a, int b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  void moralize() {
    for (int i = 0; i < static_cast<int>(adj.size()); ++i) {
      if (!ancestral[i]) continue;
      auto ps = net.parents(node(i));
      for (std::size_t a = 0; a < ps.size(); ++a) {
        link(id(ps[a]), i);
        for (std::size_t b = a + 1; b < ps.size(); ++b) {
          link(id(ps[a]), id(ps[b]));
        }
      }
    }
    for (auto& nb : adj) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
  }
};

}  // namespace

DSeparationResult d_separation_query(const TimeNetwork& net,
                                     const std::vector<TimeNode>& a,
                                     const std::vector<TimeNode>& b,
                                     const std::vector<TimeNode>& c) {
  if (a.empty() || b.empty()) {
    throw SelectorError("d-separation: query sets must be nonempty");
  }
  for (const auto& v : a) net.check_node(v);
  for (const auto& v : b) net.check_node(v);
  for (const auto& v : c) net.check_node(v);
  auto overlap = [](const std::vector<TimeNode>& u,
                    const std::vector<TimeNode>& v) {
    for (const auto& n : u) {
      if (std::find(v.begin(), v.end(), n) != v.end()) return true;
    }
    return false;
  };
  if (overlap(a, b) || overlap(a, c) || overlap(b, c)) {
    throw DisjointnessError("d-separation: query sets must be disjoint");
  }

  MoralGraph g(net);
  std::vector<TimeNode> seeds;
  seeds.insert(seeds.end(), a.begin(), a.end());
  seeds.insert(seeds.end(), b.begin(), b.end());
  seeds.insert(seeds.end(), c.begin(), c.end());
  g.mark_ancestral(seeds);
  g.moralize();
  for (const auto& v : c) g.removed[g.id(v)] = 1;

  std::vector<char> in_b(g.adj.size(), 0);
  for (const auto& v : b) in_b[g.id(v)] = 1;

  std::vector<int> pred(g.adj.size(), -1);
  std::vector<char> seen(g.adj.size(), 0);
  std::queue<int> q;
  for (const auto& v : a) {
    int i = g.id(v);
    seen[i] = 1;
    q.push(i);
  }
  while (!q.empty()) {
    int i = q.front();
    q.pop();
    if (in_b[i]) {
      DSeparationResult res;
      res.separated = false;
      std::vector<TimeNode> path;
      for (int v = i; v != -1; v = pred[v]) path.push_back(g.node(v));
      std::reverse(path.begin(), path.end());
      res.witness_path = std::move(path);
      return res;
    }
    for (int nb : g.adj[i]) {
      if (seen[nb] || g.removed[nb] || !g.ancestral[nb]) continue;
      seen[nb] = 1;
      pred[nb] = i;
      q.push(nb);
    }
  }
  DSeparationResult res;
  res.separated = true;
  return res;
}

bool d_separated(const TimeNetwork& net, const std::vector<TimeNode>& a,
                 const std::vector<TimeNode>& b,
                 const std::vector<TimeNode>& c) {
  return d_separation_query(net, a, b, c).separated;
}

bool y_pairwise_separated(const TimeNetwork& net, int anchor) {
  int d = net.order();
  if (anchor < 4 * d + 4) {
    throw HorizonError("y_pairwise_separated: anchor below 4*order + 4");
  }
  if (anchor > net.horizon()) {
    throw HorizonError("y_pairwise_separated: anchor beyond network horizon");
  }

  std::vector<TimeNode> cond;
  for (int t = 1; t <= anchor; ++t) {
    cond.push_back({Process::X, t});
    if (net.process_active(Process::Z)) cond.push_back({Process::Z, t});
  }
  for (int j = 1; j < anchor; ++j) {
    for (int k = j + 1; k <= anchor && k - j <= anchor - 2 * d; ++k) {
      if (!d_separated(net, {{Process::Y, j}}, {{Process::Y, k}}, cond)) {
        return false;
      }
    }
  }
  return true;
}

const char* verdict_name(MarkovCertificate::Verdict v) {
  switch (v) {
    case MarkovCertificate::Verdict::NoInfluence: return "NoInfluence";
    case MarkovCertificate::Verdict::DSeparatedAtOrder:
      return "DSeparatedAtOrder";
    default: return "NotDSeparated";
  }
}

MarkovCertificate markov_certificate(const TimeNetwork& net, int l,
                                     int anchor) {
  int d = net.order();
  if (anchor == 0) anchor = net.horizon();
  if (anchor < 4 * d + 4) {
    throw HorizonError("markov_certificate: anchor below 4*order + 4");
  }
  if (anchor > net.horizon()) {
    throw HorizonError("markov_certificate: anchor beyond network horizon");
  }
  if (l < 1 || l > anchor - 2) {
    throw HorizonError("markov_certificate: order l out of range");
  }

  MarkovCertificate cert;
  cert.tested_l_values = {l};
  cert.anchor = anchor;

  bool y_to_x = false;
  for (const auto& e : net.template_edges()) {
    if (e.source == Process::Y && e.target == Process::X) y_to_x = true;
  }
  if (!y_to_x) {
    cert.verdict = MarkovCertificate::Verdict::NoInfluence;
    return cert;
  }

  std::vector<TimeNode> a{{Process::X, anchor}};
  std::vector<TimeNode> cond, older;
  for (int t = anchor - l; t <= anchor - 1; ++t) {
    cond.push_back({Process::X, t});
    if (net.process_active(Process::Z)) cond.push_back({Process::Z, t});
  }
  for (int t = 1; t <= anchor - l - 1; ++t) {
    older.push_back({Process::X, t});
    if (net.process_active(Process::Z)) older.push_back({Process::Z, t});
  }
  cert.conditioning_set_size = static_cast<int>(cond.size());

  DSeparationResult res = d_separation_query(net, a, older, cond);
  if (res.separated) {
    cert.verdict = MarkovCertificate::Verdict::DSeparatedAtOrder;
  } else {
    cert.verdict = MarkovCertificate::Verdict::NotDSeparated;
    cert.witness_path = std::move(res.witness_path);
  }
  return cert;
}

int default_horizon(int order, int l) {
  return std::max(4 * order + 4, 4 * (order + l) + 4);
}

}  // namespace dinfo
