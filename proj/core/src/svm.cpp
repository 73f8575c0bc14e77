#include "hmax/svm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <thread>

#include "hmax/errors.hpp"
#include "hmax/rng.hpp"
#include "wire.hpp"

namespace hmax {
namespace {

constexpr char kSvmMagic[4] = {'H', 'M', 'X', 'S'};
constexpr uint32_t kSvmVersion = 1;

// One binary subproblem: minimize 0.5|w|^2 + C sum hinge(y, w.x~) over the
// bias-augmented inputs x~ = [x; 1], solved in the dual by coordinate
// descent. The epoch order is a seeded permutation; the loop stops when
// the duality gap falls under the relative tolerance or the epoch budget
// runs out.
void train_binary(const FeatureMatrix& x, const std::vector<int8_t>& y,
                  const SvmOptions& opt, uint64_t seed, float* w_out, float* b_out) {
  const size_t n = x.samples;
  const size_t dim = x.features + 1;  // trailing slot is the bias input

  std::vector<double> w(dim, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qdiag(n);
  for (size_t i = 0; i < n; ++i) {
    double q = 1.0;  // bias feature
    const double* row = x.row(i);
    for (size_t f = 0; f < x.features; ++f) q += row[f] * row[f];
    qdiag[i] = q;
  }

  std::mt19937_64 rng(seed);
  std::vector<uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);

  for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
    shuffle_inplace(perm, rng);
    for (uint32_t i : perm) {
      const double* row = x.row(i);
      double dot = w[dim - 1];
      for (size_t f = 0; f < x.features; ++f) dot += w[f] * row[f];
      const double g = y[i] * dot - 1.0;

      double pg = g;
      if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] >= opt.C) pg = std::max(g, 0.0);
      if (pg == 0.0) continue;

      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / qdiag[i], 0.0, opt.C);
      const double step = (alpha[i] - old) * y[i];
      if (step != 0.0) {
        for (size_t f = 0; f < x.features; ++f) w[f] += step * row[f];
        w[dim - 1] += step;
      }
    }

    double wsq = 0.0;
    for (double v : w) wsq += v * v;
    double hinge = 0.0, asum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double* row = x.row(i);
      double dot = w[dim - 1];
      for (size_t f = 0; f < x.features; ++f) dot += w[f] * row[f];
      hinge += std::max(0.0, 1.0 - y[i] * dot);
      asum += alpha[i];
    }
    const double primal = 0.5 * wsq + opt.C * hinge;
    const double dual = asum - 0.5 * wsq;
    if (primal - dual <= opt.gap_tolerance * (1.0 + std::abs(primal))) break;
  }

  for (size_t f = 0; f < x.features; ++f) w_out[f] = static_cast<float>(w[f]);
  *b_out = static_cast<float>(w[dim - 1]);
}

int worker_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("HMAX_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned long>(cap) < hw) hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(hw);
}

}  // namespace

SvmModel train_linear_svm_ova(const FeatureMatrix& x, const std::vector<int>& labels,
                              int classes, const SvmOptions& opt) {
  if (classes < 2) {
    throw InvalidArgument("one-vs-all needs at least 2 classes");
  }
  if (labels.size() != x.samples || x.values.size() != x.samples * x.features) {
    throw InvalidArgument("feature matrix and label count disagree");
  }
  std::vector<size_t> counts(classes, 0);
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw InvalidArgument("label " + std::to_string(y) + " outside 0.." +
                            std::to_string(classes - 1));
    }
    ++counts[y];
  }
  for (int c = 0; c < classes; ++c) {
    if (counts[c] == 0) {
      throw TrainingError("class " + std::to_string(c) + " has no examples");
    }
  }

  SvmModel model;
  model.classes = static_cast<uint32_t>(classes);
  model.feature_count = static_cast<uint32_t>(x.features);
  model.weights.assign(size_t(classes) * x.features, 0.0f);
  model.biases.assign(classes, 0.0f);

  // Subproblems are independent; run them on a small worker pool. Each
  // writes only its own weight row, so the result does not depend on the
  // schedule.
  std::atomic<int> next{0};
  auto work = [&]() {
    std::vector<int8_t> y(x.samples);
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= classes) return;
      for (size_t i = 0; i < x.samples; ++i) y[i] = labels[i] == c ? 1 : -1;
      train_binary(x, y, opt, opt.seed + static_cast<uint64_t>(c),
                   model.weights.data() + size_t(c) * x.features, &model.biases[c]);
    }
  };
  const int workers = std::min(worker_budget(), classes);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return model;
}

std::vector<double> svm_scores(const SvmModel& model, const std::vector<double>& x) {
  if (x.size() != model.feature_count) {
    throw InvalidArgument("input length " + std::to_string(x.size()) +
                          " does not match model feature count " +
                          std::to_string(model.feature_count));
  }
  std::vector<double> scores(model.classes);
  for (uint32_t c = 0; c < model.classes; ++c) {
    const float* w = model.row(c);
    double s = model.biases[c];
    for (uint32_t f = 0; f < model.feature_count; ++f) s += double(w[f]) * x[f];
    scores[c] = s;
  }
  return scores;
}

int svm_predict(const SvmModel& model, const std::vector<double>& x) {
  const std::vector<double> scores = svm_scores(model, x);
  int best = 0;
  for (size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = static_cast<int>(c);
  }
  return best;
}

void save_svm(std::ostream& out, const SvmModel& model) {
  wire::put_magic(out, kSvmMagic);
  wire::put_u32(out, kSvmVersion);
  wire::put_u32(out, model.classes);
  wire::put_u32(out, model.feature_count);
  for (uint32_t c = 0; c < model.classes; ++c) {
    const float* w = model.row(c);
    for (uint32_t f = 0; f < model.feature_count; ++f) wire::put_f32(out, w[f]);
    wire::put_f32(out, model.biases[c]);
  }
  if (!out) throw IoError("failed writing svm model");
}

void save_svm(const std::string& path, const SvmModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  save_svm(out, model);
  if (!out.flush()) throw IoError("failed writing " + path);
}

SvmModel load_svm(std::istream& in) {
  wire::check_magic(in, kSvmMagic, "svm model");
  wire::check_version(in, kSvmVersion, "svm model");
  SvmModel model;
  model.classes = wire::get_u32(in, "class count");
  model.feature_count = wire::get_u32(in, "feature count");
  model.weights.resize(size_t(model.classes) * model.feature_count);
  model.biases.resize(model.classes);
  for (uint32_t c = 0; c < model.classes; ++c) {
    float* w = model.weights.data() + size_t(c) * model.feature_count;
    for (uint32_t f = 0; f < model.feature_count; ++f) w[f] = wire::get_f32(in, "weight");
    model.biases[c] = wire::get_f32(in, "bias");
  }
  return model;
}

SvmModel load_svm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return load_svm(in);
}

void describe_svm(std::ostream& out, const SvmModel& model) {
  out << "svm model: " << model.classes << " classes over " << model.feature_count
      << " features\n";
  out.precision(9);
  for (uint32_t c = 0; c < model.classes; ++c) {
    const float* w = model.row(c);
    double norm = 0.0;
    for (uint32_t f = 0; f < model.feature_count; ++f) norm += double(w[f]) * w[f];
    out << "class " << c << ": |w| = " << std::sqrt(norm) << ", b = " << model.biases[c]
        << "\n";
  }
}

}  // namespace hmax
