#pragma once

#include <array>
#include <span>
#include <vector>

#include "ala/core/graph.hpp"
#include "ala/core/types.hpp"
#include "ala/losses/loss_param.hpp"

namespace ala::losses {

inline constexpr double kProbClamp = 1e-7;
inline constexpr double kDistanceFloor = 1e-4;

// ---------------------------------------------------------------------------
// Distance function bank for the mixture loss.
//
//   increasing F⁺: d², d^2.5, d^1.5, 0.5·e^{0.6d²} − 0.5, 0.5·e^{0.6d} − 0.5
//   decreasing F⁻: 0.5/d, 0.2/d, 0.1/d², log(1/d), log(1/d²)
//
// Indices 0..4 are F⁺, 5..9 are F⁻, matching Φ's layout.

double bank_function(int index, double d);
/// d/dd of bank_function.
double bank_derivative(int index, double d);
/// Distances at or below zero are floored before the decreasing terms.
double floor_distance(double d);

// ---------------------------------------------------------------------------
// Scalar forms. These are the reference definitions; the graph forms below
// compute the same quantities over batches with gradients.

/// −σ(yᵀ Φ log p) for one sample; probabilities are clamped to
/// [1e-7, 1 − 1e-7] first. `label` is a class index.
double ala_classification_loss(std::span<const double> probs, int label, const Matrix& phi);
/// Same, with the label given as a one-hot vector; InputError if it is not.
double ala_classification_loss(std::span<const double> probs, std::span<const double> one_hot,
                               const Matrix& phi);
/// −log p_y with the same clamp.
double cross_entropy_loss(std::span<const double> probs, int label);
double cross_entropy_loss(std::span<const double> probs, std::span<const double> one_hot);

/// max(0, d⁺² − d⁻² + η). InputError on negative distances.
double triplet_loss(double d_plus, double d_minus, double margin);

/// Σ Φ(i)·F⁺_i(d⁺) + Σ Φ(i+5)·F⁻_i(d⁻). Distances ≤ 1e-4 are floored; when
/// that happens and `floored` is non-null it is set to true.
double distance_mixture_loss(double d_plus, double d_minus, std::span<const double> phi,
                             bool* floored = nullptr);

/// (1/Φ₁)·log[1 + Σ exp(Φ₁(d⁺ − α))] + (1/Φ₂)·log[1 + Σ exp(−Φ₂(d⁻ − α))].
double focal_weighting_loss(std::span<const double> d_plus, std::span<const double> d_minus,
                            double phi1, double phi2, double alpha);

/// Turns integer labels into an n × num_classes one-hot matrix.
Matrix one_hot(const std::vector<int>& labels, int num_classes);
/// Checks a one-hot row and returns its class index; InputError otherwise.
int one_hot_label(std::span<const double> row);

// ---------------------------------------------------------------------------
// Graph forms (batch means). Φ and labels enter as constants.

core::Var ala_classification_loss(core::Graph& g, core::Var probs, const std::vector<int>& labels,
                                  const Matrix& phi);
core::Var cross_entropy_loss(core::Graph& g, core::Var probs, const std::vector<int>& labels);

/// Anchor/positive/negative distances d⁺ (n×1) and d⁻ (n×1) for a batch of
/// embeddings and index triplets.
struct TripletDistances {
  core::Var d_plus;
  core::Var d_minus;
};

struct Triplet {
  int anchor;
  int positive;
  int negative;
};

TripletDistances triplet_distances(core::Graph& g, core::Var embeddings,
                                   const std::vector<Triplet>& triplets);

core::Var triplet_loss(core::Graph& g, core::Var d_plus, core::Var d_minus, double margin);
core::Var distance_mixture_loss(core::Graph& g, core::Var d_plus, core::Var d_minus,
                                std::span<const double> phi);
/// The default distance loss d⁺² + 0.5/d⁻ written without the mixture; equals
/// the mixture at Φ₀ bit for bit.
core::Var default_distance_loss(core::Graph& g, core::Var d_plus, core::Var d_minus);
/// One bank term F_index(d) as a graph node (d is floored for F⁻ terms).
core::Var bank_term(core::Graph& g, int index, core::Var d);

/// Focal weighting over all in-batch pairs: each sample is an anchor, its
/// positives are the other samples with its label and its negatives are the
/// samples with a different label. Averaged over anchors.
core::Var focal_weighting_loss(core::Graph& g, core::Var embeddings,
                               const std::vector<int>& labels, double phi1, double phi2,
                               double alpha);

}  // namespace ala::losses
