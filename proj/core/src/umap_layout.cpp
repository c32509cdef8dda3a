#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "kanto/embed.hpp"
#include "kanto/error.hpp"

namespace kanto {

namespace {

struct Edge {
  std::size_t head;
  std::size_t tail;
  double weight;
};

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Fits 1 / (1 + a x^(2b)) to the target membership curve for min_dist.
std::pair<double, double> fit_ab(double min_dist, double spread) {
  constexpr int kPoints = 300;
  std::vector<double> xs(kPoints), ys(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * spread * i / (kPoints - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  double a = 1.5, b = 0.9, damping = 1e-3;
  auto loss = [&](double ca, double cb) {
    double s = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double r = 1.0 / (1.0 + ca * std::pow(xs[i], 2 * cb)) - ys[i];
      s += r * r;
    }
    return s;
  };
  double current = loss(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    double jtj[2][2] = {{0, 0}, {0, 0}}, jtr[2] = {0, 0};
    for (int i = 0; i < kPoints; ++i) {
      if (xs[i] <= 0.0) continue;
      const double p = std::pow(xs[i], 2 * b);
      const double den = 1.0 + a * p;
      const double r = 1.0 / den - ys[i];
      const double da = -p / (den * den);
      const double db = -a * p * 2.0 * std::log(xs[i]) / (den * den);
      jtj[0][0] += da * da;
      jtj[0][1] += da * db;
      jtj[1][1] += db * db;
      jtr[0] += da * r;
      jtr[1] += db * r;
    }
    const double m00 = jtj[0][0] * (1 + damping), m11 = jtj[1][1] * (1 + damping), m01 = jtj[0][1];
    const double det = m00 * m11 - m01 * m01;
    if (std::abs(det) < 1e-300) break;
    const double step_a = (m11 * jtr[0] - m01 * jtr[1]) / det;
    const double step_b = (m00 * jtr[1] - m01 * jtr[0]) / det;
    const double na = a - step_a, nb = b - step_b;
    const double candidate = na > 0 && nb > 0 ? loss(na, nb) : std::numeric_limits<double>::infinity();
    if (candidate < current) {
      a = na;
      b = nb;
      damping *= 0.3;
      if (current - candidate < 1e-14) break;
      current = candidate;
    } else {
      damping *= 10.0;
      if (damping > 1e10) break;
    }
  }
  return {a, b};
}

double clip4(double v) { return std::clamp(v, -4.0, 4.0); }

}  // namespace

Embedding embed_neighbor(const FloatMatrix& rows, std::size_t dim, const NeighborEmbeddingOptions& o) {
  const std::size_t n = rows.rows;
  const std::size_t width = rows.cols;
  if (o.n_neighbors == 0 || o.n_neighbors >= n)
    throw Error(ErrorCode::parameter, "n_neighbors must lie in [1, rows)");
  if (dim == 0) throw Error(ErrorCode::parameter, "embedding dimension must be positive");

  Embedding out;
  out.rows = n;
  out.dim = dim;
  out.method = EmbeddingMethod::neighbor;
  out.values.assign(n * dim, 0.0);

  // Exact duplicates collapse onto one representative.
  auto row_ptr = [&](std::size_t i) { return rows.values.data() + i * width; };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(row_ptr(a), row_ptr(a) + width, row_ptr(b), row_ptr(b) + width);
  });
  std::vector<std::size_t> rep(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cur = order[i];
    if (i > 0 && std::equal(row_ptr(cur), row_ptr(cur) + width, row_ptr(order[i - 1])))
      rep[cur] = rep[order[i - 1]];
    else
      rep[cur] = cur;
  }
  std::vector<std::size_t> unique;  // representatives in index order
  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rep[i] == i) {
      slot[i] = unique.size();
      unique.push_back(i);
    }
  }
  const std::size_t m = unique.size();
  if (m == 1) return out;
  const std::size_t k = std::min(o.n_neighbors, m - 1);

  // Exact k-NN by brute force; ties resolved by index.
  std::vector<std::vector<std::pair<double, std::size_t>>> knn(m);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < m; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      const float* a = row_ptr(unique[i]);
      const float* b = row_ptr(unique[j]);
      for (std::size_t c = 0; c < width; ++c) {
        const double diff = static_cast<double>(a[c]) - b[c];
        d2 += diff * diff;
      }
      cand.emplace_back(std::sqrt(d2), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    knn[i].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
  }

  // Smooth k-NN distances: per-point rho and sigma with sum of memberships = log2(k).
  const double target = std::log2(static_cast<double>(std::max<std::size_t>(k, 2)));
  std::map<std::pair<std::size_t, std::size_t>, double> directed;
  for (std::size_t i = 0; i < m; ++i) {
    const double rho = knn[i].front().first;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), sigma = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
      double psum = 0.0;
      for (const auto& [d, j] : knn[i]) psum += std::exp(-std::max(0.0, d - rho) / sigma);
      if (std::abs(psum - target) < 1e-5) break;
      if (psum > target) {
        hi = sigma;
        sigma = (lo + hi) / 2.0;
      } else {
        lo = sigma;
        sigma = std::isinf(hi) ? sigma * 2.0 : (lo + hi) / 2.0;
      }
    }
    double mean_d = 0.0;
    for (const auto& [d, j] : knn[i]) mean_d += d;
    sigma = std::max(sigma, 1e-3 * mean_d / static_cast<double>(k));
    for (const auto& [d, j] : knn[i]) directed[{i, j}] = std::exp(-std::max(0.0, d - rho) / sigma);
  }

  // Fuzzy union: w = a + b - a*b, stored for both directions.
  std::vector<Edge> edges;
  for (const auto& [key, w] : directed) {
    const auto [i, j] = key;
    auto back = directed.find({j, i});
    const double wb = back == directed.end() ? 0.0 : back->second;
    if (back != directed.end() && j < i) continue;
    const double sym = w + wb - w * wb;
    edges.push_back({i, j, sym});
    edges.push_back({j, i, sym});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.head, a.tail) < std::tie(b.head, b.tail);
  });

  const std::size_t epochs = o.epochs ? o.epochs : (m <= 10000 ? 500 : 200);
  double max_w = 0.0;
  for (const Edge& e : edges) max_w = std::max(max_w, e.weight);
  std::erase_if(edges, [&](const Edge& e) { return e.weight < max_w / static_cast<double>(epochs); });

  const auto [a, b] = fit_ab(o.min_dist, 1.0);

  std::mt19937_64 rng(o.seed);
  std::vector<double> y(m * dim);
  for (double& v : y) v = uniform01(rng) * 20.0 - 10.0;

  std::vector<double> eps(edges.size()), next(edges.size()), eps_neg(edges.size()), next_neg(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    eps[e] = max_w / edges[e].weight;
    next[e] = eps[e];
    eps_neg[e] = eps[e] / o.negative_sample_rate;
    next_neg[e] = eps_neg[e];
  }

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const double alpha = o.learning_rate * (1.0 - static_cast<double>(epoch) / epochs);
    const double now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (next[e] > now) continue;
      double* cur = &y[edges[e].head * dim];
      double* oth = &y[edges[e].tail * dim];
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) d2 += (cur[c] - oth[c]) * (cur[c] - oth[c]);
      if (d2 > 0.0) {
        const double coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
        for (std::size_t c = 0; c < dim; ++c) {
          const double g = clip4(coeff * (cur[c] - oth[c])) * alpha;
          cur[c] += g;
          oth[c] -= g;
        }
      }
      next[e] += eps[e];

      const auto negatives = static_cast<std::size_t>((now - next_neg[e]) / eps_neg[e]);
      for (std::size_t s = 0; s < negatives; ++s) {
        const std::size_t other = static_cast<std::size_t>(rng() % m);
        if (other == edges[e].head) continue;
        const double* neg = &y[other * dim];
        double nd2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) nd2 += (cur[c] - neg[c]) * (cur[c] - neg[c]);
        const double coeff = nd2 > 0.0 ? 2.0 * b / ((0.001 + nd2) * (a * std::pow(nd2, b) + 1.0)) : 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          const double g = coeff > 0.0 ? clip4(coeff * (cur[c] - neg[c])) : 4.0;
          cur[c] += g * alpha;
        }
      }
      next_neg[e] += static_cast<double>(negatives) * eps_neg[e];
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(&y[slot[rep[i]] * dim], dim, &out.values[i * dim]);
  return out;
}

}  // namespace kanto
