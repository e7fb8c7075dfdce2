#pragma once

#include <cstdint>
#include <vector>

#include "ala/core/types.hpp"

namespace ala::core {

/// Handle to a node of a Graph. Only meaningful for the graph that made it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,       // a[n×k] · b[k×m]
  kAddRowVec,    // a[n×m] + b[1×m] broadcast over rows
  kAdd,
  kSub,
  kMul,          // elementwise
  kScale,        // a · c
  kAddScalar,    // a + c
  kRelu,
  kSigmoid,
  kSoftmaxRows,
  kLogSoftmaxRows,
  kLog,
  kExp,
  kPow,          // a^c, a > 0
  kClamp,        // clamp(a, lo, hi); zero gradient outside
  kMaxZero,      // max(a, 0)
  kL2NormalizeRows,
  kRowNorm,      // ||row||₂ → n×1
  kRowSum,       // n×m → n×1
  kSum,          // → 1×1
  kMean,         // → 1×1
  kGatherRows,
  kPairwiseDist, // a[n×e] → n×n Euclidean distances
};

/// Reverse-mode tape over dense 64-bit matrices.
///
/// Nodes are appended in evaluation order, so creation order is a
/// topological order: every operand precedes its consumers. backward()
/// walks the tape once in reverse, touching each node at most once.
class Graph {
 public:
  Graph() = default;

  /// Leaf holding data that does not receive a gradient.
  Var constant(Matrix value);
  /// Leaf that receives a gradient on backward().
  Var variable(Matrix value);

  Var matmul(Var a, Var b);
  Var add_row_vector(Var a, Var row);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var softmax_rows(Var a);
  Var log_softmax_rows(Var a);
  Var log(Var a);
  Var exp(Var a);
  Var pow(Var a, double exponent);
  Var clamp(Var a, double lo, double hi);
  Var max_zero(Var a);
  Var l2_normalize_rows(Var a);
  Var row_norm(Var a);
  Var row_sum(Var a);
  Var sum(Var a);
  Var mean(Var a);
  Var gather_rows(Var a, std::vector<int> rows);
  Var pairwise_distances(Var a);

  const Matrix& value(Var v) const;
  /// Scalar value of a 1×1 node.
  double scalar(Var v) const;

  /// Populates gradients of `loss` (must be 1×1 and finite) with respect to
  /// every variable it depends on. Throws UsageError otherwise.
  void backward(Var loss);

  /// Gradient accumulated by the last backward(); zero matrix if `v` was not
  /// reachable from the loss.
  Matrix grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    int a = -1;
    int b = -1;
    double c0 = 0.0;
    double c1 = 0.0;
    bool requires_grad = false;
    Matrix value;
    Matrix grad;
    std::vector<int> index;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  void accumulate(int id, const Matrix& g);
  void backprop_node(const Node& n);

  std::vector<Node> nodes_;
};

}  // namespace ala::core
