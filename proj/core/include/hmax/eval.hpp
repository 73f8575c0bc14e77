#pragma once

#include <vector>

namespace hmax {

struct RocPoint {
  double threshold;  // predict positive when score > threshold
  double fpr;
  double fnr;
};

// One operating point per distinct decision boundary: -infinity (everything
// positive), the midpoint between each pair of adjacent distinct scores,
// and +infinity. False positive rate is non-increasing and false negative
// rate non-decreasing along the sweep.
std::vector<RocPoint> roc_sweep(const std::vector<double>& scores,
                                const std::vector<int>& labels);

// Accuracy at the equal-error operating point: 1 minus the rate where the
// sweep crosses fpr == fnr, linearly interpolated between the adjacent
// points when no listed threshold hits the crossing exactly. Labels are
// -1/+1; both must be present.
double eer_accuracy(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace hmax
