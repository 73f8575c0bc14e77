#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hmax/gentleboost.hpp"  // FeatureMatrix

namespace hmax {

// Linear one-vs-all classifier. Weights are kept in 32-bit floats; class
// score is w.x + b and prediction is the argmax (ties go to the lowest
// class index).
struct SvmModel {
  uint32_t classes = 0;
  uint32_t feature_count = 0;
  std::vector<float> weights;  // classes x feature_count, row-major
  std::vector<float> biases;   // one per class

  const float* row(uint32_t c) const { return weights.data() + size_t(c) * feature_count; }
};

struct SvmOptions {
  double C = 1.0;
  int max_epochs = 1000;
  double gap_tolerance = 1e-4;  // relative duality gap
  uint64_t seed = 0;
};

// Trains one L1-hinge binary subproblem per class by dual coordinate
// descent with a seeded per-epoch example order. Each subproblem is
// independent and deterministic, so the result is reproducible bit for
// bit from (data, options).
SvmModel train_linear_svm_ova(const FeatureMatrix& features, const std::vector<int>& labels,
                              int classes, const SvmOptions& options = {});

std::vector<double> svm_scores(const SvmModel& model, const std::vector<double>& x);
int svm_predict(const SvmModel& model, const std::vector<double>& x);

void save_svm(std::ostream& out, const SvmModel& model);
void save_svm(const std::string& path, const SvmModel& model);
SvmModel load_svm(std::istream& in);
SvmModel load_svm(const std::string& path);

void describe_svm(std::ostream& out, const SvmModel& model);

}  // namespace hmax
