#include "ttie/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ttie/error.hpp"

namespace ttie::ensemble {

namespace {

constexpr double kProbSumTolerance = 1e-6;

// Each member must be a probability vector and all members must agree on the
// class count.
void check_predictions(const std::vector<Vec>& predictions) {
  check(!predictions.empty(), ErrorKind::argument, "ensemble needs at least one prediction");
  const size_t num_classes = predictions.front().size();
  check(num_classes > 0, ErrorKind::shape, "predictions must be non-empty vectors");
  for (size_t s = 0; s < predictions.size(); ++s) {
    const auto& p = predictions[s];
    check(p.size() == num_classes, ErrorKind::shape,
          "ragged predictions: member " + std::to_string(s) + " has length " +
              std::to_string(p.size()) + ", expected " + std::to_string(num_classes));
    double sum = 0.0;
    for (double v : p) {
      check(std::isfinite(v) && v >= 0.0, ErrorKind::argument,
            "prediction entries must be finite and >= 0");
      sum += v;
    }
    check(std::abs(sum - 1.0) <= kProbSumTolerance, ErrorKind::argument,
          "prediction " + std::to_string(s) + " does not sum to 1 (sum=" +
              std::to_string(sum) + ")");
  }
}

void check_scores(const Vec& scores, size_t expected) {
  check(scores.size() == expected, ErrorKind::shape,
        "need one score per prediction: got " + std::to_string(scores.size()) +
            " scores for " + std::to_string(expected) + " predictions");
  for (double v : scores)
    check(std::isfinite(v), ErrorKind::argument, "domain scores must be finite");
}

EnsembleResult combine(const std::vector<Vec>& predictions, Vec weights,
                       std::vector<int> selected) {
  const size_t num_classes = predictions.front().size();
  EnsembleResult result;
  result.weights = std::move(weights);
  result.selected = std::move(selected);
  result.y_hat.assign(num_classes, 0.0);
  for (size_t s = 0; s < predictions.size(); ++s) {
    if (result.weights[s] == 0.0) continue;
    for (size_t c = 0; c < num_classes; ++c)
      result.y_hat[c] += result.weights[s] * predictions[s][c];
  }
  return result;
}

std::vector<int> all_indices(size_t n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

Vec softmax_weights(const Vec& scores, double temperature) {
  check(!scores.empty(), ErrorKind::argument, "softmax_weights: empty score vector");
  check(std::isfinite(temperature) && temperature > 0.0, ErrorKind::argument,
        "softmax temperature must be a positive real");
  for (double v : scores)
    check(std::isfinite(v), ErrorKind::argument, "softmax_weights: non-finite score");

  const double max_score = *std::max_element(scores.begin(), scores.end());
  Vec weights(scores.size());
  double norm = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp((scores[i] - max_score) / temperature);
    norm += weights[i];
  }
  for (double& w : weights) w /= norm;
  return weights;
}

std::vector<Vec> softmax_weights_jacobian(const Vec& scores, double temperature) {
  const Vec alpha = softmax_weights(scores, temperature);
  const size_t n = alpha.size();
  std::vector<Vec> jacobian(n, Vec(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      jacobian[i][j] = alpha[i] * ((i == j ? 1.0 : 0.0) - alpha[j]) / temperature;
  return jacobian;
}

EnsembleResult naive_ensemble(const std::vector<Vec>& predictions) {
  check_predictions(predictions);
  const double w = 1.0 / static_cast<double>(predictions.size());
  return combine(predictions, Vec(predictions.size(), w), all_indices(predictions.size()));
}

EnsembleResult topk_ensemble(const std::vector<Vec>& predictions, const Vec& scores, int k) {
  check_predictions(predictions);
  check_scores(scores, predictions.size());
  const int S = static_cast<int>(predictions.size());
  check(k >= 1 && k <= S, ErrorKind::argument,
        "top-k: k=" + std::to_string(k) + " out of range [1, " + std::to_string(S) + "]");

  // The argmax over size-k index subsets of the score sum is the k largest
  // scores; stable sort on descending score gives the lowest-index tie-break.
  std::vector<int> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });

  Vec weights(predictions.size(), 0.0);
  std::vector<int> selected(order.begin(), order.begin() + k);
  std::sort(selected.begin(), selected.end());
  for (int i = 0; i < k; ++i) weights[order[i]] = 1.0 / static_cast<double>(k);
  return combine(predictions, std::move(weights), std::move(selected));
}

EnsembleResult weighted_ensemble(const std::vector<Vec>& predictions, const Vec& scores,
                                 double temperature) {
  check_predictions(predictions);
  check_scores(scores, predictions.size());
  return combine(predictions, softmax_weights(scores, temperature),
                 all_indices(predictions.size()));
}

}  // namespace ttie::ensemble
