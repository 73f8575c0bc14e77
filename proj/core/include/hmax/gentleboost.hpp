#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hmax {

// Complete depth-3 decision tree: 7 split nodes stored breadth-first
// (node i has children 2i+1 and 2i+2), followed by 8 leaves. A sample
// goes left when x[feature] <= threshold. Nodes that a fit could not
// split carry threshold +infinity, which routes everything left.
struct BoostTree {
  struct Node {
    uint32_t feature = 0;
    double threshold = 0.0;
  };
  std::array<Node, 7> nodes;
  std::array<double, 8> leaves{};  // real-valued fits clipped to [-1, 1]
};

struct BoostModel {
  uint32_t feature_count = 0;
  std::vector<BoostTree> trees;
};

// Row-major feature matrix: samples x feature_count.
struct FeatureMatrix {
  size_t samples = 0;
  size_t features = 0;
  std::vector<double> values;

  double at(size_t s, size_t f) const { return values[s * features + f]; }
  const double* row(size_t s) const { return values.data() + s * features; }
};

// Fits `rounds` trees by stagewise weighted least squares on labels in
// {-1, +1}. Each node split maximizes the weighted gain over all
// (feature, threshold) pairs, thresholds taken at midpoints of
// consecutive distinct sorted values; ties keep the first candidate in
// (feature ascending, threshold ascending) order, so the result is a
// pure function of the input.
BoostModel train_gentleboost(const FeatureMatrix& features, const std::vector<int>& labels,
                             int rounds);

double boost_tree_output(const BoostTree& tree, const double* x, size_t n);
double boost_predict(const BoostModel& model, const std::vector<double>& x);

void save_boost(std::ostream& out, const BoostModel& model);
void save_boost(const std::string& path, const BoostModel& model);
BoostModel load_boost(std::istream& in);
BoostModel load_boost(const std::string& path);

// Human-readable listing of every tree, for inspection.
void describe_boost(std::ostream& out, const BoostModel& model);

}  // namespace hmax
