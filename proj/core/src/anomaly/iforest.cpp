#include "steerlab/anomaly/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "steerlab/math/rng.hpp"
#include "steerlab/math/stats.hpp"

namespace steerlab::anomaly {

double iforest_c(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  constexpr double kEulerGamma = 0.5772156649015329;
  const double nd = static_cast<double>(n);
  return 2.0 * (std::log(nd - 1.0) + kEulerGamma) - 2.0 * (nd - 1.0) / nd;
}

namespace {

struct TreeBuilder {
  const std::vector<Vec>& data;
  std::size_t height_limit;
  Rng& rng;
  std::vector<IsoNode> nodes;

  std::int32_t build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi,
                     std::size_t depth) {
    const std::size_t count = hi - lo;
    if (count <= 1 || depth >= height_limit) {
      nodes.push_back(IsoNode{-1, 0.0, -1, -1, static_cast<std::int32_t>(count)});
      return static_cast<std::int32_t>(nodes.size() - 1);
    }

    const std::size_t dims = data.front().size();
    // pick the split feature among those with spread, starting from a random one
    const std::size_t first = rng.uniform_index(dims);
    std::size_t feature = dims;
    double fmin = 0.0, fmax = 0.0;
    for (std::size_t probe = 0; probe < dims; ++probe) {
      const std::size_t f = (first + probe) % dims;
      double mn = data[idx[lo]][f], mx = mn;
      for (std::size_t k = lo + 1; k < hi; ++k) {
        mn = std::min(mn, data[idx[k]][f]);
        mx = std::max(mx, data[idx[k]][f]);
      }
      if (mx > mn) {
        feature = f;
        fmin = mn;
        fmax = mx;
        break;
      }
    }
    if (feature == dims) {  // all duplicate points
      nodes.push_back(IsoNode{-1, 0.0, -1, -1, static_cast<std::int32_t>(count)});
      return static_cast<std::int32_t>(nodes.size() - 1);
    }

    const double threshold = rng.uniform(fmin, fmax);
    auto mid_it = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                 idx.begin() + static_cast<std::ptrdiff_t>(hi),
                                 [&](std::size_t k) { return data[k][feature] < threshold; });
    const std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());

    const std::int32_t self = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(IsoNode{static_cast<std::int32_t>(feature), threshold, -1, -1, 0});
    const std::int32_t left = build(idx, lo, mid, depth + 1);
    const std::int32_t right = build(idx, mid, hi, depth + 1);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }
};

double path_length(const std::vector<IsoNode>& tree, const Vec& x) {
  std::size_t node = 0;
  double depth = 0.0;
  while (true) {
    const IsoNode& n = tree[node];
    if (n.feature < 0) return depth + iforest_c(static_cast<std::size_t>(n.size));
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                                         : n.right);
    depth += 1.0;
  }
}

}  // namespace

IsolationForestModel iforest_fit(const std::vector<Vec>& data, const IForestParams& params,
                                 std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("iforest_fit: empty training data");
  const std::size_t n = data.size();
  const std::size_t dims = data.front().size();
  for (const auto& row : data) {
    if (row.size() != dims) throw std::invalid_argument("iforest_fit: ragged rows");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("iforest_fit: non-finite feature");
    }
  }

  IsolationForestModel model;
  model.n_features = dims;
  model.subsample = std::min(params.subsample, n);
  model.contamination = params.contamination;
  const auto height_limit =
      static_cast<std::size_t>(std::ceil(std::log2(std::max<std::size_t>(model.subsample, 2))));

  Rng rng(derive_seed(seed, 0x69666f72ULL));
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;

  for (std::size_t t = 0; t < params.n_trees; ++t) {
    // partial Fisher-Yates draw of the subsample
    for (std::size_t k = 0; k < model.subsample; ++k) {
      const std::size_t j = k + rng.uniform_index(n - k);
      std::swap(pool[k], pool[j]);
    }
    std::vector<std::size_t> idx(pool.begin(),
                                 pool.begin() + static_cast<std::ptrdiff_t>(model.subsample));
    TreeBuilder builder{data, height_limit, rng, {}};
    builder.build(idx, 0, idx.size(), 0);
    model.trees.push_back(std::move(builder.nodes));
  }

  Vec train_scores(n);
  for (std::size_t i = 0; i < n; ++i) train_scores[i] = iforest_score(model, data[i]);
  model.score_threshold = quantile(train_scores, 1.0 - params.contamination);
  return model;
}

double iforest_score(const IsolationForestModel& model, const Vec& x) {
  if (x.size() != model.n_features) throw std::invalid_argument("iforest_score: bad feature width");
  double avg = 0.0;
  for (const auto& tree : model.trees) avg += path_length(tree, x);
  avg /= static_cast<double>(model.trees.size());
  const double denom = std::max(iforest_c(model.subsample), 1e-12);
  return std::pow(2.0, -avg / denom);
}

void IsolationForestModel::to_container(io::Container& c, const std::string& prefix) const {
  c.put_u64(prefix + ".n_trees", trees.size());
  c.put_u64(prefix + ".subsample", subsample);
  c.put_u64(prefix + ".n_features", n_features);
  c.put_scalar(prefix + ".score_threshold", score_threshold);
  c.put_scalar(prefix + ".contamination", contamination);
  for (std::size_t t = 0; t < trees.size(); ++t) {
    std::vector<std::int64_t> meta;
    std::vector<double> thr;
    meta.reserve(trees[t].size() * 4);
    thr.reserve(trees[t].size());
    for (const auto& n : trees[t]) {
      meta.push_back(n.feature);
      meta.push_back(n.left);
      meta.push_back(n.right);
      meta.push_back(n.size);
      thr.push_back(n.threshold);
    }
    const std::string base = prefix + ".tree" + std::to_string(t);
    c.put_i64(base + ".meta", {trees[t].size(), 4}, std::move(meta));
    c.put_f64(base + ".thr", {trees[t].size()}, std::move(thr));
  }
}

IsolationForestModel IsolationForestModel::from_container(const io::Container& c,
                                                          const std::string& prefix) {
  IsolationForestModel m;
  const auto n_trees = c.get_u64(prefix + ".n_trees");
  m.subsample = static_cast<std::size_t>(c.get_u64(prefix + ".subsample"));
  m.n_features = static_cast<std::size_t>(c.get_u64(prefix + ".n_features"));
  m.score_threshold = c.get_scalar(prefix + ".score_threshold");
  m.contamination = c.get_scalar(prefix + ".contamination");
  for (std::uint64_t t = 0; t < n_trees; ++t) {
    const std::string base = prefix + ".tree" + std::to_string(t);
    const auto& meta = c.get(base + ".meta");
    const auto& thr = c.get(base + ".thr");
    const std::size_t count = static_cast<std::size_t>(meta.dims[0]);
    std::vector<IsoNode> tree(count);
    for (std::size_t i = 0; i < count; ++i) {
      tree[i].feature = static_cast<std::int32_t>(meta.i64[i * 4 + 0]);
      tree[i].left = static_cast<std::int32_t>(meta.i64[i * 4 + 1]);
      tree[i].right = static_cast<std::int32_t>(meta.i64[i * 4 + 2]);
      tree[i].size = static_cast<std::int32_t>(meta.i64[i * 4 + 3]);
      tree[i].threshold = thr.f64[i];
    }
    m.trees.push_back(std::move(tree));
  }
  return m;
}

}  // namespace steerlab::anomaly
