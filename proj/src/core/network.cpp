#include "ala/core/network.hpp"

#include <cmath>
#include <utility>

#include "ala/core/rng.hpp"

namespace ala::core {

Network::Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  if (spec_.sizes.size() < 2) throw UsageError("network needs at least one layer");
  for (int s : spec_.sizes) {
    if (s <= 0) throw UsageError("network layer widths must be positive");
  }
  Rng rng(seed);
  for (int k = 0; k < spec_.num_layers(); ++k) {
    const int in = spec_.sizes[k];
    const int out = spec_.sizes[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Matrix w(in, out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = uniform(rng, -bound, bound);
    params_.push_back({"layer" + std::to_string(k) + ".weight", std::move(w)});
    params_.push_back({"layer" + std::to_string(k) + ".bias", Matrix::Zero(1, out)});
  }
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const Tensor& t : params_) total += static_cast<std::size_t>(t.value.size());
  return total;
}

BoundParams Network::bind(Graph& graph) const {
  BoundParams bound;
  bound.vars.reserve(params_.size());
  for (const Tensor& t : params_) bound.vars.push_back(graph.variable(t.value));
  return bound;
}

Var Network::forward_logits(Graph& graph, const BoundParams& bound, Var input) const {
  if (graph.value(input).cols() != spec_.input_dim()) {
    throw ShapeError("network: input has " + std::to_string(graph.value(input).cols()) +
                     " columns, expected " + std::to_string(spec_.input_dim()));
  }
  Var h = input;
  const int layers = spec_.num_layers();
  for (int k = 0; k < layers; ++k) {
    h = graph.add_row_vector(graph.matmul(h, bound.vars[2 * k]), bound.vars[2 * k + 1]);
    if (k + 1 < layers && spec_.hidden == Activation::kRelu) h = graph.relu(h);
  }
  return h;
}

Var Network::forward(Graph& graph, const BoundParams& bound, Var input) const {
  Var out = forward_logits(graph, bound, input);
  switch (spec_.head) {
    case Head::kSoftmax:
      return graph.softmax_rows(out);
    case Head::kL2Normalize:
      return graph.l2_normalize_rows(out);
    case Head::kNone:
      break;
  }
  return out;
}

void Network::check_input(const Matrix& batch) const {
  if (batch.cols() != spec_.input_dim()) {
    throw ShapeError("network: input has " + std::to_string(batch.cols()) +
                     " columns, expected " + std::to_string(spec_.input_dim()));
  }
  if (!batch.allFinite()) throw InputError("network: non-finite input");
}

Matrix Network::predict_logits(const Matrix& batch) const {
  check_input(batch);
  Matrix h = batch;
  const int layers = spec_.num_layers();
  for (int k = 0; k < layers; ++k) {
    Matrix next = h * params_[2 * k].value;
    next.rowwise() += params_[2 * k + 1].value.row(0);
    if (k + 1 < layers && spec_.hidden == Activation::kRelu) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

Matrix Network::predict(const Matrix& batch) const {
  Matrix out = predict_logits(batch);
  switch (spec_.head) {
    case Head::kSoftmax:
      return softmax_rows(out);
    case Head::kL2Normalize:
      return l2_normalize_rows(out);
    case Head::kNone:
      break;
  }
  return out;
}

std::vector<Matrix> Network::gradients(const Graph& graph, const BoundParams& bound) {
  std::vector<Matrix> grads;
  grads.reserve(bound.vars.size());
  for (Var v : bound.vars) grads.push_back(graph.grad(v));
  return grads;
}

bool Network::all_finite() const {
  for (const Tensor& t : params_) {
    if (!t.value.allFinite()) return false;
  }
  return true;
}

Matrix softmax_rows(const Matrix& logits) {
  // Same arithmetic as Graph::softmax_rows so graph and graph-free paths
  // agree bit for bit.
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double e = std::exp(logits(r, c) - mx);
      out(r, c) = e;
      total += e;
    }
    out.row(r) /= total;
  }
  return out;
}

Matrix l2_normalize_rows(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = std::max(x.row(r).norm(), 1e-12);
    out.row(r) /= norm;
  }
  return out;
}

std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

std::string to_string(Head h) {
  switch (h) {
    case Head::kSoftmax:
      return "softmax";
    case Head::kL2Normalize:
      return "l2norm";
    case Head::kNone:
      break;
  }
  return "none";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw UsageError("unknown activation '" + s + "'");
}

Head head_from_string(const std::string& s) {
  if (s == "softmax") return Head::kSoftmax;
  if (s == "l2norm") return Head::kL2Normalize;
  if (s == "none") return Head::kNone;
  throw UsageError("unknown head '" + s + "'");
}

}  // namespace ala::core
