#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lmd/login_graph.hpp"
#include "lmd/random.hpp"

namespace lmd {

// A lateral-movement prototype: a rooted tree on 2..5 abstract nodes where
// every non-root node has exactly one parent and no pair of nodes is linked
// in both directions.
struct AdversarialGraph {
  int type_index = 0;
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // (parent, child) over 0..node_count-1
  int root = 0;
  // Sorted recursive subtree encoding ('1' opens, '0' closes), e.g. "110100"
  // for a root with two leaves.
  std::string canonical_code;

  bool operator==(const AdversarialGraph&) const = default;
};

inline constexpr int kMinAdversarialNodes = 2;
inline constexpr int kMaxAdversarialNodes = 5;

// All rooted trees with 2..5 nodes up to isomorphism, ordered by
// (node_count, canonical_code). type_index follows that order.
std::vector<AdversarialGraph> enumerate_adversarial();

// Cached result of enumerate_adversarial().
const std::vector<AdversarialGraph>& adversarial_catalog();

// Checks the single-root / single-parent / no-double-back / tree shape rules.
bool satisfies_lateral_rules(const AdversarialGraph& graph);

// Generates system identifiers that collide with nothing in `taken` nor with
// anything generated earlier.
class FreshIdSource {
 public:
  explicit FreshIdSource(std::set<SystemId> taken, std::string prefix = "adv-");
  SystemId next();

 private:
  std::set<SystemId> taken_;
  std::string prefix_;
  std::uint64_t counter_ = 0;
};

struct Injection {
  LoginGraph graph;
  std::set<VertexKey> injected;
};

// Adds the prototype as a separate component with fresh identifiers and unit
// edge weights. Throws std::invalid_argument if a generated identifier is
// already in the parent.
Injection inject_novel_to_novel(const LoginGraph& parent, const AdversarialGraph& adv,
                                FreshIdSource& fresh_ids);

// Identifies one uniformly chosen prototype node with a uniformly chosen
// parent vertex; the rest get fresh identifiers. A prototype edge that
// coincides with an existing edge increments its weight. The replaced known
// vertex is part of `injected`. Throws std::invalid_argument for an empty
// parent.
Injection inject_novel_to_known(const LoginGraph& parent, const AdversarialGraph& adv, Rng& rng,
                                FreshIdSource& fresh_ids);

}  // namespace lmd
