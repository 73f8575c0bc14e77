#include "hmax/eval.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "hmax/errors.hpp"

namespace hmax {
namespace {

struct Example {
  double score;
  int label;
};

std::vector<Example> checked_examples(const std::vector<double>& scores,
                                      const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("scores and labels differ in length");
  }
  size_t pos = 0, neg = 0;
  for (int y : labels) {
    if (y == 1) ++pos;
    else if (y == -1) ++neg;
    else throw InvalidArgument("labels must be -1 or +1");
  }
  if (pos == 0 || neg == 0) {
    throw MetricError("equal-error rate needs both labels present");
  }
  std::vector<Example> ex(scores.size());
  for (size_t i = 0; i < ex.size(); ++i) ex[i] = {scores[i], labels[i]};
  std::sort(ex.begin(), ex.end(), [](const Example& a, const Example& b) {
    return a.score < b.score;
  });
  return ex;
}

}  // namespace

std::vector<RocPoint> roc_sweep(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  const std::vector<Example> ex = checked_examples(scores, labels);
  const size_t n = ex.size();
  double total_pos = 0, total_neg = 0;
  for (const Example& e : ex) (e.label == 1 ? total_pos : total_neg) += 1;

  // Cutting the sorted list after the first j examples predicts those j
  // negative and the rest positive; only boundaries between distinct
  // scores (plus the two ends) are distinct operating points.
  std::vector<RocPoint> out;
  double fn = 0, tn = 0;  // counts among the first j examples
  for (size_t j = 0; j <= n; ++j) {
    const bool boundary = j == 0 || j == n || ex[j - 1].score < ex[j].score;
    if (boundary) {
      RocPoint p;
      if (j == 0) p.threshold = -std::numeric_limits<double>::infinity();
      else if (j == n) p.threshold = std::numeric_limits<double>::infinity();
      else p.threshold = 0.5 * (ex[j - 1].score + ex[j].score);
      p.fpr = (total_neg - tn) / total_neg;
      p.fnr = fn / total_pos;
      out.push_back(p);
    }
    if (j < n) (ex[j].label == 1 ? fn : tn) += 1;
  }
  return out;
}

double eer_accuracy(const std::vector<double>& scores, const std::vector<int>& labels) {
  const std::vector<RocPoint> sweep = roc_sweep(scores, labels);
  // fpr - fnr starts at +1 and ends at -1; find the sign change.
  for (size_t k = 0; k + 1 < sweep.size(); ++k) {
    const double dk = sweep[k].fpr - sweep[k].fnr;
    if (dk == 0.0) return 1.0 - sweep[k].fpr;
    const double dn = sweep[k + 1].fpr - sweep[k + 1].fnr;
    if (dk > 0.0 && dn <= 0.0) {
      if (dn == 0.0) return 1.0 - sweep[k + 1].fpr;
      const double alpha = dk / (dk - dn);
      const double eer = sweep[k].fpr + alpha * (sweep[k + 1].fpr - sweep[k].fpr);
      return 1.0 - eer;
    }
  }
  throw MetricError("no equal-error crossing found");  // unreachable for valid input
}

}  // namespace hmax
