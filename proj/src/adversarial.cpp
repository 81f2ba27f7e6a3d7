#include "lmd/adversarial.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace lmd {

namespace {

// AHU encoding with '1' opening and '0' closing a subtree: "1" + sorted child
// encodings + "0". Under this alphabet the star of each size sorts first.
std::string encode(int v, const std::vector<std::vector<int>>& children) {
  std::vector<std::string> parts;
  parts.reserve(children[v].size());
  for (int c : children[v]) parts.push_back(encode(c, children));
  std::sort(parts.begin(), parts.end());
  std::string out = "1";
  for (const auto& p : parts) out += p;
  out += "0";
  return out;
}

// Splits "1AB...0" into its top-level child encodings.
std::vector<std::string> split_children(const std::string& code) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 1;
  for (std::size_t i = 1; i + 1 < code.size(); ++i) {
    if (code[i] == '1') {
      if (depth == 0) start = i;
      ++depth;
    } else {
      --depth;
      if (depth == 0) out.push_back(code.substr(start, i - start + 1));
    }
  }
  return out;
}

// Rebuilds a labelled tree from a canonical code, numbering nodes in
// pre-order with children visited in code order.
void decode(const std::string& code, int parent, int& next_id,
            std::vector<std::pair<int, int>>& edges) {
  const int self = next_id++;
  if (parent >= 0) edges.emplace_back(parent, self);
  for (const auto& child : split_children(code)) decode(child, self, next_id, edges);
}

// Every parent assignment for nodes 1..n-1 that forms a tree rooted at 0.
void for_each_rooted_tree(int n, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::function<void(int)> assign = [&](int node) {
    if (node == n) {
      // Acyclic iff every node reaches the root by following parents.
      for (int v = 1; v < n; ++v) {
        int cur = v, steps = 0;
        while (cur != 0 && steps <= n) {
          cur = parent[static_cast<std::size_t>(cur)];
          ++steps;
        }
        if (cur != 0) return;
      }
      visit(parent);
      return;
    }
    for (int p = 0; p < n; ++p) {
      if (p == node) continue;
      parent[static_cast<std::size_t>(node)] = p;
      assign(node + 1);
    }
  };
  assign(1);
}

}  // namespace

std::vector<AdversarialGraph> enumerate_adversarial() {
  std::vector<AdversarialGraph> catalog;
  for (int n = kMinAdversarialNodes; n <= kMaxAdversarialNodes; ++n) {
    std::set<std::string> codes;
    for_each_rooted_tree(n, [&](const std::vector<int>& parent) {
      std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
      for (int v = 1; v < n; ++v) children[static_cast<std::size_t>(parent[v])].push_back(v);
      codes.insert(encode(0, children));
    });
    for (const auto& code : codes) {
      AdversarialGraph g;
      g.type_index = static_cast<int>(catalog.size());
      g.node_count = n;
      g.root = 0;
      g.canonical_code = code;
      int next_id = 0;
      decode(code, -1, next_id, g.edges);
      catalog.push_back(std::move(g));
    }
  }
  return catalog;
}

const std::vector<AdversarialGraph>& adversarial_catalog() {
  static const std::vector<AdversarialGraph> catalog = enumerate_adversarial();
  return catalog;
}

bool satisfies_lateral_rules(const AdversarialGraph& graph) {
  const int n = graph.node_count;
  if (n < 1 || graph.root < 0 || graph.root >= n) return false;
  if (static_cast<int>(graph.edges.size()) != n - 1) return false;
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : graph.edges) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) return false;
    if (seen.contains({b, a}) || !seen.insert({a, b}).second) return false;
    ++indeg[static_cast<std::size_t>(b)];
  }
  for (int v = 0; v < n; ++v) {
    const int expected = v == graph.root ? 0 : 1;
    if (indeg[static_cast<std::size_t>(v)] != expected) return false;
  }
  // Connected: everything reachable from the root.
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (auto [a, b] : graph.edges) out[static_cast<std::size_t>(a)].push_back(b);
  std::vector<char> seen_v(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{graph.root};
  seen_v[static_cast<std::size_t>(graph.root)] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int s : out[static_cast<std::size_t>(v)])
      if (!seen_v[static_cast<std::size_t>(s)]) {
        seen_v[static_cast<std::size_t>(s)] = 1;
        ++reached;
        stack.push_back(s);
      }
  }
  return reached == n;
}

FreshIdSource::FreshIdSource(std::set<SystemId> taken, std::string prefix)
    : taken_(std::move(taken)), prefix_(std::move(prefix)) {}

SystemId FreshIdSource::next() {
  for (;;) {
    SystemId id = prefix_ + std::to_string(counter_++);
    if (taken_.insert(id).second) return id;
  }
}

Injection inject_novel_to_novel(const LoginGraph& parent, const AdversarialGraph& adv,
                                FreshIdSource& fresh_ids) {
  Injection out{parent, {}};
  std::vector<SystemId> ids;
  for (int v = 0; v < adv.node_count; ++v) {
    SystemId id = fresh_ids.next();
    if (parent.contains(id))
      throw std::invalid_argument("fresh identifier '" + id + "' collides with the parent graph");
    out.graph.add_vertex(id);
    out.injected.insert(VertexKey{parent.day(), id});
    ids.push_back(std::move(id));
  }
  for (auto [a, b] : adv.edges)
    out.graph.add_login(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)], 1);
  return out;
}

Injection inject_novel_to_known(const LoginGraph& parent, const AdversarialGraph& adv, Rng& rng,
                                FreshIdSource& fresh_ids) {
  if (parent.vertex_count() == 0)
    throw std::invalid_argument("inject_novel_to_known: parent graph has no vertices");
  const auto replaced = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(adv.node_count)));
  const std::size_t known_index = rng.uniform_index(parent.vertex_count());
  const SystemId known = *std::next(parent.vertices().begin(), static_cast<std::ptrdiff_t>(known_index));

  Injection out{parent, {}};
  std::vector<SystemId> ids;
  for (int v = 0; v < adv.node_count; ++v) {
    SystemId id;
    if (v == replaced) {
      id = known;
    } else {
      id = fresh_ids.next();
      if (parent.contains(id))
        throw std::invalid_argument("fresh identifier '" + id +
                                    "' collides with the parent graph");
      out.graph.add_vertex(id);
    }
    out.injected.insert(VertexKey{parent.day(), id});
    ids.push_back(std::move(id));
  }
  for (auto [a, b] : adv.edges)
    out.graph.add_login(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)], 1);
  return out;
}

}  // namespace lmd
