#pragma once

#include <vector>

namespace ttie::ensemble {

using Vec = std::vector<double>;

/// Outcome of combining S per-domain class-probability vectors.
/// `weights` holds the convex weights actually applied (zeros for discarded
/// members) and always sums to 1; `selected` lists the member indices with
/// nonzero weight, ascending.
struct EnsembleResult {
  Vec y_hat;
  Vec weights;
  std::vector<int> selected;
};

/// softmax(scores / temperature), computed with max-subtraction so that
/// scores with magnitude up to ~1e4 stay overflow-free. Output sums to 1
/// and is invariant under adding a constant to all scores.
Vec softmax_weights(const Vec& scores, double temperature);

/// Analytic Jacobian of softmax_weights at `scores`:
/// J[i][j] = alpha_i (delta_ij - alpha_j) / T.
std::vector<Vec> softmax_weights_jacobian(const Vec& scores, double temperature);

/// Uniform average of all member predictions.
EnsembleResult naive_ensemble(const std::vector<Vec>& predictions);

/// Average of the k members whose scores have the largest sum over all
/// size-k index subsets (equivalently the k largest scores). Ties are broken
/// toward the lowest domain index.
EnsembleResult topk_ensemble(const std::vector<Vec>& predictions, const Vec& scores, int k);

/// Score-weighted average with weights softmax(scores / T).
EnsembleResult weighted_ensemble(const std::vector<Vec>& predictions, const Vec& scores,
                                 double temperature);

}  // namespace ttie::ensemble
