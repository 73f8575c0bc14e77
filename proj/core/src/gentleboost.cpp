#include "hmax/gentleboost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "hmax/errors.hpp"
#include "wire.hpp"

namespace hmax {
namespace {

constexpr char kBoostMagic[4] = {'H', 'M', 'X', 'B'};
constexpr uint32_t kBoostVersion = 1;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Split {
  bool found = false;
  uint32_t feature = 0;
  double threshold = kInf;
};

// Best (feature, threshold) for one node: maximizes the weighted gain
// (sum wy)^2/sum w of the two sides. Candidates are midpoints between
// consecutive distinct values; the scan order (features ascending, then
// values ascending) plus strict improvement makes the choice unique.
Split best_split(const FeatureMatrix& x, const std::vector<double>& w,
                 const std::vector<int>& y, const std::vector<std::vector<uint32_t>>& order,
                 const std::vector<int>& node_of, int node) {
  double tw = 0.0, twy = 0.0;
  for (size_t i = 0; i < x.samples; ++i) {
    if (node_of[i] == node) {
      tw += w[i];
      twy += w[i] * y[i];
    }
  }
  Split best;
  if (tw <= 0.0) return best;
  double best_gain = twy * twy / tw;  // unsplit node as the baseline

  for (size_t f = 0; f < x.features; ++f) {
    double wl = 0.0, wyl = 0.0;
    double prev = 0.0;
    bool have_prev = false;
    for (uint32_t i : order[f]) {
      if (node_of[i] != node) continue;
      const double v = x.at(i, f);
      if (have_prev && v > prev) {
        const double wr = tw - wl;
        if (wl > 0.0 && wr > 0.0) {
          const double wyr = twy - wyl;
          const double gain = wyl * wyl / wl + wyr * wyr / wr;
          if (gain > best_gain) {
            best_gain = gain;
            best.found = true;
            best.feature = static_cast<uint32_t>(f);
            best.threshold = 0.5 * (prev + v);
          }
        }
      }
      wl += w[i];
      wyl += w[i] * y[i];
      prev = v;
      have_prev = true;
    }
  }
  return best;
}

}  // namespace

BoostModel train_gentleboost(const FeatureMatrix& x, const std::vector<int>& labels,
                             int rounds) {
  const size_t n = x.samples;
  if (labels.size() != n || x.values.size() != n * x.features) {
    throw InvalidArgument("feature matrix and label count disagree");
  }
  size_t pos = 0, neg = 0;
  for (int y : labels) {
    if (y == 1) ++pos;
    else if (y == -1) ++neg;
    else throw InvalidArgument("labels must be -1 or +1");
  }
  if (pos < 2 || neg < 2) {
    throw TrainingError("training needs at least two examples of each label");
  }
  if (rounds < 1) {
    throw TrainingError("rounds must be at least 1");
  }

  // One argsort per feature, reused by every node of every round.
  std::vector<std::vector<uint32_t>> order(x.features);
  for (size_t f = 0; f < x.features; ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0u);
    std::sort(order[f].begin(), order[f].end(), [&](uint32_t a, uint32_t b) {
      const double va = x.at(a, f), vb = x.at(b, f);
      return va != vb ? va < vb : a < b;
    });
  }

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<int> node_of(n, 0);

  BoostModel model;
  model.feature_count = static_cast<uint32_t>(x.features);
  model.trees.reserve(rounds);

  for (int round = 0; round < rounds; ++round) {
    BoostTree tree;
    std::fill(node_of.begin(), node_of.end(), 0);
    for (int level = 0; level < 3; ++level) {
      const int first = (1 << level) - 1;
      const int last = (1 << (level + 1)) - 1;
      for (int node = first; node < last; ++node) {
        const Split s = best_split(x, w, labels, order, node_of, node);
        tree.nodes[node].feature = s.feature;
        tree.nodes[node].threshold = s.found ? s.threshold : kInf;
      }
      for (size_t i = 0; i < n; ++i) {
        const int node = node_of[i];
        if (node >= first && node < last) {
          const BoostTree::Node& nd = tree.nodes[node];
          node_of[i] = 2 * node + 1 + (x.at(i, nd.feature) <= nd.threshold ? 0 : 1);
        }
      }
    }

    double leaf_w[8] = {}, leaf_wy[8] = {};
    for (size_t i = 0; i < n; ++i) {
      const int leaf = node_of[i] - 7;
      leaf_w[leaf] += w[i];
      leaf_wy[leaf] += w[i] * labels[i];
    }
    for (int l = 0; l < 8; ++l) {
      tree.leaves[l] =
          leaf_w[l] > 0.0 ? std::clamp(leaf_wy[l] / leaf_w[l], -1.0, 1.0) : 0.0;
    }

    double wsum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(-labels[i] * tree.leaves[node_of[i] - 7]);
      wsum += w[i];
    }
    for (double& v : w) v /= wsum;

    model.trees.push_back(tree);
  }
  return model;
}

double boost_tree_output(const BoostTree& tree, const double* x, size_t n) {
  int node = 0;
  for (int depth = 0; depth < 3; ++depth) {
    const BoostTree::Node& nd = tree.nodes[node];
    if (nd.feature >= n) {
      throw InvalidArgument("tree references feature " + std::to_string(nd.feature) +
                            " beyond input length " + std::to_string(n));
    }
    node = 2 * node + 1 + (x[nd.feature] <= nd.threshold ? 0 : 1);
  }
  return tree.leaves[node - 7];
}

double boost_predict(const BoostModel& model, const std::vector<double>& x) {
  if (x.size() != model.feature_count) {
    throw InvalidArgument("input length " + std::to_string(x.size()) +
                          " does not match model feature count " +
                          std::to_string(model.feature_count));
  }
  double score = 0.0;
  for (const BoostTree& tree : model.trees) {
    score += boost_tree_output(tree, x.data(), x.size());
  }
  return score;
}

void save_boost(std::ostream& out, const BoostModel& model) {
  wire::put_magic(out, kBoostMagic);
  wire::put_u32(out, kBoostVersion);
  wire::put_u32(out, model.feature_count);
  wire::put_u32(out, static_cast<uint32_t>(model.trees.size()));
  for (const BoostTree& t : model.trees) {
    for (const auto& nd : t.nodes) {
      wire::put_u32(out, nd.feature);
      wire::put_f64(out, nd.threshold);
    }
    for (double v : t.leaves) wire::put_f64(out, v);
  }
  if (!out) throw IoError("failed writing boost model");
}

void save_boost(const std::string& path, const BoostModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  save_boost(out, model);
  if (!out.flush()) throw IoError("failed writing " + path);
}

BoostModel load_boost(std::istream& in) {
  wire::check_magic(in, kBoostMagic, "boost model");
  wire::check_version(in, kBoostVersion, "boost model");
  BoostModel model;
  model.feature_count = wire::get_u32(in, "feature count");
  const uint32_t trees = wire::get_u32(in, "tree count");
  model.trees.reserve(trees);
  for (uint32_t i = 0; i < trees; ++i) {
    BoostTree t;
    for (auto& nd : t.nodes) {
      nd.feature = wire::get_u32(in, "node feature");
      nd.threshold = wire::get_f64(in, "node threshold");
      if (nd.feature >= model.feature_count) {
        throw FormatError("boost model: node feature out of range");
      }
    }
    for (double& v : t.leaves) v = wire::get_f64(in, "leaf value");
    model.trees.push_back(t);
  }
  return model;
}

BoostModel load_boost(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return load_boost(in);
}

void describe_boost(std::ostream& out, const BoostModel& model) {
  out << "boost model: " << model.trees.size() << " trees over " << model.feature_count
      << " features\n";
  out.precision(9);
  for (size_t i = 0; i < model.trees.size(); ++i) {
    const BoostTree& t = model.trees[i];
    out << "tree " << i << "\n";
    for (int n = 0; n < 7; ++n) {
      out << "  node " << n << ": f" << t.nodes[n].feature << " <= " << t.nodes[n].threshold
          << "\n";
    }
    out << "  leaves:";
    for (double v : t.leaves) out << ' ' << v;
    out << "\n";
  }
}

}  // namespace hmax
