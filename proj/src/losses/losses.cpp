#include "ala/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ala::losses {

using core::Graph;
using core::Var;

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

void check_label(int label, std::size_t num_classes) {
  if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
    throw InputError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(num_classes) + " classes");
  }
}

void check_distance(double d, const char* what) {
  if (!(d >= 0.0)) throw InputError(std::string(what) + " distance must be >= 0");
}

}  // namespace

double floor_distance(double d) { return std::max(d, kDistanceFloor); }

double bank_function(int index, double d) {
  switch (index) {
    case 0: return std::pow(d, 2.0);
    case 1: return std::pow(d, 2.5);
    case 2: return std::pow(d, 1.5);
    case 3: return 0.5 * std::exp(0.6 * std::pow(d, 2.0)) - 0.5;
    case 4: return 0.5 * std::exp(0.6 * d) - 0.5;
    case 5: return 0.5 * std::pow(floor_distance(d), -1.0);
    case 6: return 0.2 * std::pow(floor_distance(d), -1.0);
    case 7: return 0.1 * std::pow(floor_distance(d), -2.0);
    case 8: return -std::log(floor_distance(d));
    case 9: return -2.0 * std::log(floor_distance(d));
    default: break;
  }
  throw UsageError("bank index " + std::to_string(index) + " out of range");
}

double bank_derivative(int index, double d) {
  const double f = floor_distance(d);
  const bool active = d > kDistanceFloor;
  switch (index) {
    case 0: return 2.0 * d;
    case 1: return 2.5 * std::pow(d, 1.5);
    case 2: return 1.5 * std::pow(d, 0.5);
    case 3: return 0.5 * std::exp(0.6 * d * d) * 1.2 * d;
    case 4: return 0.3 * std::exp(0.6 * d);
    case 5: return active ? -0.5 / (f * f) : 0.0;
    case 6: return active ? -0.2 / (f * f) : 0.0;
    case 7: return active ? -0.2 / (f * f * f) : 0.0;
    case 8: return active ? -1.0 / f : 0.0;
    case 9: return active ? -2.0 / f : 0.0;
    default: break;
  }
  throw UsageError("bank index " + std::to_string(index) + " out of range");
}

int one_hot_label(std::span<const double> row) {
  int label = -1;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] == 1.0) {
      if (label >= 0) throw InputError("label vector has more than one hot entry");
      label = static_cast<int>(j);
    } else if (row[j] != 0.0) {
      throw InputError("label vector is not one-hot");
    }
  }
  if (label < 0) throw InputError("label vector has no hot entry");
  return label;
}

Matrix one_hot(const std::vector<int>& labels, int num_classes) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    check_label(labels[n], static_cast<std::size_t>(num_classes));
    y(static_cast<Eigen::Index>(n), labels[n]) = 1.0;
  }
  return y;
}

double ala_classification_loss(std::span<const double> probs, int label, const Matrix& phi) {
  check_label(label, probs.size());
  if (phi.rows() != static_cast<Eigen::Index>(probs.size()) || phi.cols() != phi.rows()) {
    throw ShapeError("ala_classification_loss: Φ is " + shape_str(phi) + " for " +
                     std::to_string(probs.size()) + " classes");
  }
  double z = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    z += phi(label, static_cast<Eigen::Index>(j)) * std::log(clamp_prob(probs[j]));
  }
  return -sigmoid(z);
}

double ala_classification_loss(std::span<const double> probs, std::span<const double> one_hot,
                               const Matrix& phi) {
  if (one_hot.size() != probs.size()) throw ShapeError("label/probability length mismatch");
  return ala_classification_loss(probs, one_hot_label(one_hot), phi);
}

double cross_entropy_loss(std::span<const double> probs, int label) {
  check_label(label, probs.size());
  return -std::log(clamp_prob(probs[static_cast<std::size_t>(label)]));
}

double cross_entropy_loss(std::span<const double> probs, std::span<const double> one_hot) {
  if (one_hot.size() != probs.size()) throw ShapeError("label/probability length mismatch");
  return cross_entropy_loss(probs, one_hot_label(one_hot));
}

double triplet_loss(double d_plus, double d_minus, double margin) {
  check_distance(d_plus, "positive");
  check_distance(d_minus, "negative");
  return std::max(0.0, d_plus * d_plus - d_minus * d_minus + margin);
}

double distance_mixture_loss(double d_plus, double d_minus, std::span<const double> phi,
                             bool* floored) {
  if (phi.size() != static_cast<std::size_t>(kMixtureSize)) {
    throw ShapeError("distance mixture needs 10 weights");
  }
  if (floored != nullptr) *floored = d_minus <= kDistanceFloor;
  double total = 0.0;
  for (int i = 0; i < 5; ++i) total += phi[i] * bank_function(i, d_plus);
  for (int i = 5; i < 10; ++i) total += phi[i] * bank_function(i, d_minus);
  return total;
}

double focal_weighting_loss(std::span<const double> d_plus, std::span<const double> d_minus,
                            double phi1, double phi2, double alpha) {
  double pos = 0.0;
  for (double d : d_plus) pos += std::exp(phi1 * (d - alpha));
  double neg = 0.0;
  for (double d : d_minus) neg += std::exp(-phi2 * (d - alpha));
  return std::log1p(pos) / phi1 + std::log1p(neg) / phi2;
}

// ---------------------------------------------------------------------------

namespace {

Matrix label_rows(const Matrix& phi, const std::vector<int>& labels) {
  Matrix w(static_cast<Eigen::Index>(labels.size()), phi.cols());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    check_label(labels[n], static_cast<std::size_t>(phi.rows()));
    w.row(static_cast<Eigen::Index>(n)) = phi.row(labels[n]);
  }
  return w;
}

Var clamped_log_probs(Graph& g, Var probs) {
  return g.log(g.clamp(probs, kProbClamp, 1.0 - kProbClamp));
}

}  // namespace

Var ala_classification_loss(Graph& g, Var probs, const std::vector<int>& labels,
                            const Matrix& phi) {
  const Matrix& p = g.value(probs);
  if (p.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ShapeError("ala_classification_loss: " + std::to_string(labels.size()) +
                     " labels for " + shape_str(p) + " probabilities");
  }
  if (phi.rows() != p.cols() || phi.cols() != p.cols()) {
    throw ShapeError("ala_classification_loss: Φ is " + shape_str(phi));
  }
  Var weights = g.constant(label_rows(phi, labels));
  Var z = g.row_sum(g.mul(clamped_log_probs(g, probs), weights));
  return g.scale(g.mean(g.sigmoid(z)), -1.0);
}

Var cross_entropy_loss(Graph& g, Var probs, const std::vector<int>& labels) {
  const Matrix& p = g.value(probs);
  if (p.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ShapeError("cross_entropy_loss: label count mismatch");
  }
  Var y = g.constant(one_hot(labels, static_cast<int>(p.cols())));
  return g.scale(g.mean(g.row_sum(g.mul(clamped_log_probs(g, probs), y))), -1.0);
}

TripletDistances triplet_distances(Graph& g, Var embeddings,
                                   const std::vector<Triplet>& triplets) {
  if (triplets.empty()) throw UsageError("triplet_distances: no triplets");
  std::vector<int> a;
  std::vector<int> p;
  std::vector<int> n;
  a.reserve(triplets.size());
  p.reserve(triplets.size());
  n.reserve(triplets.size());
  for (const Triplet& t : triplets) {
    a.push_back(t.anchor);
    p.push_back(t.positive);
    n.push_back(t.negative);
  }
  Var ea = g.gather_rows(embeddings, std::move(a));
  Var ep = g.gather_rows(embeddings, std::move(p));
  Var en = g.gather_rows(embeddings, std::move(n));
  return {g.row_norm(g.sub(ea, ep)), g.row_norm(g.sub(ea, en))};
}

Var triplet_loss(Graph& g, Var d_plus, Var d_minus, double margin) {
  Var diff = g.sub(g.pow(d_plus, 2.0), g.pow(d_minus, 2.0));
  return g.mean(g.max_zero(g.add_scalar(diff, margin)));
}

Var bank_term(Graph& g, int index, Var d) {
  switch (index) {
    case 0: return g.pow(d, 2.0);
    case 1: return g.pow(d, 2.5);
    case 2: return g.pow(d, 1.5);
    case 3: return g.add_scalar(g.scale(g.exp(g.scale(g.pow(d, 2.0), 0.6)), 0.5), -0.5);
    case 4: return g.add_scalar(g.scale(g.exp(g.scale(d, 0.6)), 0.5), -0.5);
    default: break;
  }
  if (index < 0 || index >= kMixtureSize) {
    throw UsageError("bank index " + std::to_string(index) + " out of range");
  }
  Var f = g.clamp(d, kDistanceFloor, std::numeric_limits<double>::infinity());
  switch (index) {
    case 5: return g.scale(g.pow(f, -1.0), 0.5);
    case 6: return g.scale(g.pow(f, -1.0), 0.2);
    case 7: return g.scale(g.pow(f, -2.0), 0.1);
    case 8: return g.scale(g.log(f), -1.0);
    default: return g.scale(g.log(f), -2.0);
  }
}

Var distance_mixture_loss(Graph& g, Var d_plus, Var d_minus, std::span<const double> phi) {
  if (phi.size() != static_cast<std::size_t>(kMixtureSize)) {
    throw ShapeError("distance mixture needs 10 weights");
  }
  Var total = g.scale(bank_term(g, 0, d_plus), phi[0]);
  for (int i = 1; i < 5; ++i) total = g.add(total, g.scale(bank_term(g, i, d_plus), phi[i]));
  for (int i = 5; i < 10; ++i) total = g.add(total, g.scale(bank_term(g, i, d_minus), phi[i]));
  return g.mean(total);
}

Var default_distance_loss(Graph& g, Var d_plus, Var d_minus) {
  return g.mean(g.add(bank_term(g, 0, d_plus), bank_term(g, 5, d_minus)));
}

Var focal_weighting_loss(Graph& g, Var embeddings, const std::vector<int>& labels, double phi1,
                         double phi2, double alpha) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (g.value(embeddings).rows() != n) throw ShapeError("focal loss: label count mismatch");
  Matrix pos = Matrix::Zero(n, n);
  Matrix neg = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      (labels[i] == labels[j] ? pos : neg)(i, j) = 1.0;
    }
  }
  Var dist = g.pairwise_distances(embeddings);
  Var shifted = g.add_scalar(dist, -alpha);
  Var pos_sum = g.row_sum(g.mul(g.exp(g.scale(shifted, phi1)), g.constant(std::move(pos))));
  Var neg_sum = g.row_sum(g.mul(g.exp(g.scale(shifted, -phi2)), g.constant(std::move(neg))));
  Var pos_term = g.scale(g.log(g.add_scalar(pos_sum, 1.0)), 1.0 / phi1);
  Var neg_term = g.scale(g.log(g.add_scalar(neg_sum, 1.0)), 1.0 / phi2);
  return g.mean(g.add(pos_term, neg_term));
}

}  // namespace ala::losses
