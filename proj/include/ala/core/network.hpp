#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ala/core/graph.hpp"
#include "ala/core/types.hpp"

namespace ala::core {

enum class Activation { kIdentity, kRelu };
enum class Head { kNone, kSoftmax, kL2Normalize };

/// A named parameter tensor.
struct Tensor {
  std::string name;
  Matrix value;
};

/// Architecture of a feedforward net: layer widths from input to output,
/// activation after every hidden layer, and an output head.
struct NetworkSpec {
  std::vector<int> sizes;  // {d_in, h_1, ..., d_out}
  Activation hidden = Activation::kRelu;
  Head head = Head::kNone;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int num_layers() const { return static_cast<int>(sizes.size()) - 1; }
};

/// Graph handles for a network's parameters, in Network::parameters() order.
struct BoundParams {
  std::vector<Var> vars;
};

/// Dense feedforward network: affine layers with an activation between them
/// and an optional softmax / L2-normalization head. Layer k holds
/// "layer{k}.weight" [in×out] and "layer{k}.bias" [1×out]; row-vector
/// convention, outputs = inputs · W + b.
class Network {
 public:
  Network() = default;
  /// Uniform(−1/√fan_in, 1/√fan_in) weights, zero biases.
  Network(NetworkSpec spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  BoundParams bind(Graph& graph) const;
  /// Output of the final layer before the head.
  Var forward_logits(Graph& graph, const BoundParams& bound, Var input) const;
  /// Output including the head.
  Var forward(Graph& graph, const BoundParams& bound, Var input) const;

  /// Graph-free inference over a batch [n × d_in]. Throws ShapeError on a
  /// column mismatch and InputError on non-finite inputs.
  Matrix predict(const Matrix& batch) const;
  Matrix predict_logits(const Matrix& batch) const;

  static std::vector<Matrix> gradients(const Graph& graph, const BoundParams& bound);

  bool all_finite() const;

 private:
  void check_input(const Matrix& batch) const;

  NetworkSpec spec_;
  std::vector<Tensor> params_;
};

/// Row-wise softmax of a logit matrix.
Matrix softmax_rows(const Matrix& logits);
/// Row-wise L2 normalization.
Matrix l2_normalize_rows(const Matrix& x);

std::string to_string(Activation a);
std::string to_string(Head h);
Activation activation_from_string(const std::string& s);
Head head_from_string(const std::string& s);

}  // namespace ala::core
