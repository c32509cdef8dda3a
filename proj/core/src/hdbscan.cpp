#include "kanto/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "kanto/error.hpp"

namespace kanto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MstEdge {
  std::size_t a;
  std::size_t b;
  double weight;
};

bool edge_less(double wa, std::size_t a0, std::size_t a1, double wb, std::size_t b0, std::size_t b1) {
  return std::make_tuple(wa, std::min(a0, a1), std::max(a0, a1)) <
         std::make_tuple(wb, std::min(b0, b1), std::max(b0, b1));
}

class Points {
 public:
  Points(std::span<const double> coords, std::size_t dim) : coords_(coords), dim_(dim) {}
  std::size_t size() const { return dim_ ? coords_.size() / dim_ : 0; }
  double distance(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double d = coords_[i * dim_ + c] - coords_[j * dim_ + c];
      s += d * d;
    }
    return std::sqrt(s);
  }

 private:
  std::span<const double> coords_;
  std::size_t dim_;
};

std::vector<double> core_distances(const Points& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<double> core(n), row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = pts.distance(i, j);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    core[i] = row[k - 1];
  }
  return core;
}

// Prim's algorithm on the dense mutual-reachability graph.
std::vector<MstEdge> mutual_reachability_mst(const Points& pts, const std::vector<double>& core) {
  const std::size_t n = pts.size();
  std::vector<MstEdge> mst;
  if (n < 2) return mst;
  std::vector<bool> in_tree(n, false);
  std::vector<double> key(n, kInf);
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t added = 1; added < n; ++added) {
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = std::max({core[current], core[v], pts.distance(current, v)});
      if (edge_less(w, current, v, key[v], from[v], v)) {
        key[v] = w;
        from[v] = current;
      }
      if (best == n || edge_less(key[v], from[v], v, key[best], from[best], best)) best = v;
    }
    in_tree[best] = true;
    mst.push_back({from[best], best, key[best]});
    current = best;
  }
  std::sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) {
    return edge_less(x.weight, x.a, x.b, y.weight, y.a, y.b);
  });
  return mst;
}

struct LinkageNode {
  std::size_t left;
  std::size_t right;
  double distance;
  std::size_t size;
};

// Merge tree: node n + i is the i-th merge.
std::vector<LinkageNode> single_linkage(std::size_t n, const std::vector<MstEdge>& mst) {
  std::vector<std::size_t> parent(2 * n), size(2 * n, 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::vector<LinkageNode> tree;
  tree.reserve(n - 1);
  for (const MstEdge& e : mst) {
    const std::size_t ra = find(e.a), rb = find(e.b);
    const std::size_t node = n + tree.size();
    tree.push_back({ra, rb, e.weight, size[ra] + size[rb]});
    parent[ra] = parent[rb] = node;
    size[node] = size[ra] + size[rb];
  }
  return tree;
}

}  // namespace

HdbscanResult hdbscan_cluster(std::span<const double> coords, std::size_t dim,
                              std::size_t min_cluster_size) {
  if (min_cluster_size < 2) throw Error(ErrorCode::parameter, "min_cluster_size must be at least 2");
  if (dim == 0 || coords.size() % dim != 0)
    throw Error(ErrorCode::parameter, "coordinate array does not match dimension");
  const Points pts(coords, dim);
  const std::size_t n = pts.size();

  HdbscanResult result;
  result.labels.assign(n, -1);
  result.membership_strength.assign(n, 0.0);
  if (n < min_cluster_size || n < 2) {
    result.too_few_points = true;
    return result;
  }

  const auto core = core_distances(pts, min_cluster_size);
  const auto tree = single_linkage(n, mutual_reachability_mst(pts, core));
  auto node_size = [&](std::size_t id) { return id < n ? std::size_t{1} : tree[id - n].size; };

  // Condense the merge tree.
  const std::size_t root = 2 * n - 2;
  std::vector<std::size_t> relabel(2 * n - 1, 0);
  std::vector<bool> ignore(2 * n - 1, false);
  relabel[root] = n;
  std::size_t next_label = n + 1;
  auto& condensed = result.condensed_tree;

  auto leaves_of = [&](std::size_t start, auto&& visit) {
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t id = queue.front();
      queue.pop_front();
      visit(id);
      if (id >= n) {
        queue.push_back(tree[id - n].left);
        queue.push_back(tree[id - n].right);
      }
    }
  };

  std::vector<std::size_t> bfs;
  leaves_of(root, [&](std::size_t id) { bfs.push_back(id); });
  for (std::size_t node : bfs) {
    if (node < n || ignore[node]) continue;
    const LinkageNode& ln = tree[node - n];
    const double lambda = ln.distance > 0.0 ? 1.0 / ln.distance : kInf;
    const std::size_t lsize = node_size(ln.left), rsize = node_size(ln.right);
    const std::size_t parent = relabel[node];
    auto fall_out = [&](std::size_t sub) {
      leaves_of(sub, [&](std::size_t id) {
        if (id < n) condensed.push_back({parent, id, lambda, 1});
        ignore[id] = true;
      });
    };
    if (lsize >= min_cluster_size && rsize >= min_cluster_size) {
      relabel[ln.left] = next_label++;
      condensed.push_back({parent, relabel[ln.left], lambda, lsize});
      relabel[ln.right] = next_label++;
      condensed.push_back({parent, relabel[ln.right], lambda, rsize});
    } else if (lsize < min_cluster_size && rsize < min_cluster_size) {
      fall_out(ln.left);
      fall_out(ln.right);
    } else if (lsize < min_cluster_size) {
      relabel[ln.right] = parent;
      fall_out(ln.left);
    } else {
      relabel[ln.left] = parent;
      fall_out(ln.right);
    }
  }

  // Stability of each cluster.
  const std::size_t clusters = next_label - n;
  std::vector<double> birth(clusters, 0.0);
  std::vector<std::size_t> cluster_parent(clusters, 0);
  std::vector<std::vector<std::size_t>> children(clusters);
  for (const CondensedEdge& e : condensed) {
    if (e.child >= n) {
      birth[e.child - n] = e.lambda;
      cluster_parent[e.child - n] = e.parent;
      children[e.parent - n].push_back(e.child);
    }
  }
  std::vector<double> stability(clusters, 0.0);
  for (const CondensedEdge& e : condensed) {
    const double b = birth[e.parent - n];
    if (e.lambda == b) continue;
    stability[e.parent - n] += (e.lambda - b) * static_cast<double>(e.size);
  }
  result.stability = stability;

  // Excess-of-mass selection, children before parents.
  std::vector<bool> selected(clusters, false);
  std::vector<double> subtree(stability);
  for (std::size_t c = clusters; c-- > 1;) {
    double child_sum = 0.0;
    for (std::size_t ch : children[c]) child_sum += subtree[ch - n];
    if (!children[c].empty() && child_sum > stability[c]) {
      subtree[c] = child_sum;
    } else {
      selected[c] = true;
      std::vector<std::size_t> stack(children[c].begin(), children[c].end());
      while (!stack.empty()) {
        const std::size_t d = stack.back();
        stack.pop_back();
        selected[d - n] = false;
        stack.insert(stack.end(), children[d - n].begin(), children[d - n].end());
      }
    }
  }
  if (children[0].empty()) {
    const bool all_dense = std::all_of(condensed.begin(), condensed.end(),
                                       [](const CondensedEdge& e) { return std::isinf(e.lambda); });
    selected[0] = all_dense;
  }

  // Map points to their selected ancestor.
  std::vector<std::size_t> point_cluster(n, 0);
  std::vector<double> point_lambda(n, 0.0);
  for (const CondensedEdge& e : condensed) {
    if (e.child < n) {
      point_cluster[e.child] = e.parent;
      point_lambda[e.child] = e.lambda;
    }
  }
  std::vector<std::size_t> owner(n, 0);  // selected cluster id or 0 for none
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t c = point_cluster[p];
    while (true) {
      if (selected[c - n]) {
        owner[p] = c;
        break;
      }
      if (c == n) break;
      c = cluster_parent[c - n];
    }
  }

  std::map<std::size_t, std::size_t> first_point;  // cluster id -> lowest member
  std::map<std::size_t, double> max_lambda;
  for (std::size_t p = 0; p < n; ++p) {
    if (owner[p] == 0) continue;
    first_point.emplace(owner[p], p);
    auto [it, inserted] = max_lambda.emplace(owner[p], point_lambda[p]);
    if (!inserted) it->second = std::max(it->second, point_lambda[p]);
  }
  std::vector<std::pair<std::size_t, std::size_t>> order;  // (lowest point, cluster)
  for (const auto& [c, p] : first_point) order.emplace_back(p, c);
  std::sort(order.begin(), order.end());
  std::map<std::size_t, int> label_of;
  for (std::size_t i = 0; i < order.size(); ++i) label_of[order[i].second] = static_cast<int>(i);

  for (std::size_t p = 0; p < n; ++p) {
    if (owner[p] == 0) continue;
    result.labels[p] = label_of[owner[p]];
    const double lmax = max_lambda[owner[p]];
    const double lp = point_lambda[p];
    if (std::isinf(lmax))
      result.membership_strength[p] = std::isinf(lp) ? 1.0 : 0.0;
    else
      result.membership_strength[p] = lmax > 0.0 ? std::min(lp, lmax) / lmax : 1.0;
  }
  result.cluster_count = order.size();
  for (std::size_t c = 0; c < clusters; ++c)
    if (selected[c]) result.selected.push_back(c + n);
  return result;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::parameter, "labelings differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [k, v] : table) index += pairs(v);
  for (const auto& [k, v] : rows) sum_rows += pairs(v);
  for (const auto& [k, v] : cols) sum_cols += pairs(v);
  const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
  const double max_index = (sum_rows + sum_cols) / 2.0;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace kanto
