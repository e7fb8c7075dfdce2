#include "ala/core/graph.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace ala::core {
namespace {

constexpr double kNormFloor = 1e-12;

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
  }
}

}  // namespace

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw UsageError("graph: invalid node handle " + std::to_string(v.id));
  }
  return nodes_[v.id];
}

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::variable(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.cols() != nb.value.rows()) {
    throw ShapeError("matmul: " + shape_str(na.value) + " · " +
                     shape_str(nb.value));
  }
  Node n;
  n.kind = OpKind::kMatMul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.value * nb.value;
  return push(std::move(n));
}

Var Graph::add_row_vector(Var a, Var row) {
  const Node& na = node(a);
  const Node& nr = node(row);
  if (nr.value.rows() != 1 || nr.value.cols() != na.value.cols()) {
    throw ShapeError("add_row_vector: " + shape_str(na.value) + " + " +
                     shape_str(nr.value));
  }
  Node n;
  n.kind = OpKind::kAddRowVec;
  n.a = a.id;
  n.b = row.id;
  n.requires_grad = na.requires_grad || nr.requires_grad;
  n.value = na.value.rowwise() + nr.value.row(0);
  return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "add");
  Node n;
  n.kind = OpKind::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.value + nb.value;
  return push(std::move(n));
}

Var Graph::sub(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "sub");
  Node n;
  n.kind = OpKind::kSub;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.value - nb.value;
  return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same_shape(na.value, nb.value, "mul");
  Node n;
  n.kind = OpKind::kMul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.value.cwiseProduct(nb.value);
  return push(std::move(n));
}

Var Graph::scale(Var a, double c) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kScale;
  n.a = a.id;
  n.c0 = c;
  n.requires_grad = na.requires_grad;
  n.value = na.value * c;
  return push(std::move(n));
}

Var Graph::add_scalar(Var a, double c) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kAddScalar;
  n.a = a.id;
  n.c0 = c;
  n.requires_grad = na.requires_grad;
  n.value = na.value.array() + c;
  return push(std::move(n));
}

Var Graph::relu(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kRelu;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value.cwiseMax(0.0);
  return push(std::move(n));
}

Var Graph::sigmoid(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kSigmoid;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value.unaryExpr(&stable_sigmoid);
  return push(std::move(n));
}

Var Graph::softmax_rows(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kSoftmaxRows;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.rows(), na.value.cols());
  for (Eigen::Index r = 0; r < na.value.rows(); ++r) {
    const double mx = na.value.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < na.value.cols(); ++c) {
      const double e = std::exp(na.value(r, c) - mx);
      n.value(r, c) = e;
      total += e;
    }
    n.value.row(r) /= total;
  }
  return push(std::move(n));
}

Var Graph::log_softmax_rows(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kLogSoftmaxRows;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.rows(), na.value.cols());
  for (Eigen::Index r = 0; r < na.value.rows(); ++r) {
    const double mx = na.value.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < na.value.cols(); ++c) total += std::exp(na.value(r, c) - mx);
    const double lse = mx + std::log(total);
    n.value.row(r) = na.value.row(r).array() - lse;
  }
  return push(std::move(n));
}

Var Graph::log(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kLog;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value.array().log();
  return push(std::move(n));
}

Var Graph::exp(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kExp;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value.array().exp();
  return push(std::move(n));
}

Var Graph::pow(Var a, double exponent) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kPow;
  n.a = a.id;
  n.c0 = exponent;
  n.requires_grad = na.requires_grad;
  n.value = na.value.unaryExpr([exponent](double x) { return std::pow(x, exponent); });
  return push(std::move(n));
}

Var Graph::clamp(Var a, double lo, double hi) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kClamp;
  n.a = a.id;
  n.c0 = lo;
  n.c1 = hi;
  n.requires_grad = na.requires_grad;
  n.value = na.value.cwiseMax(lo).cwiseMin(hi);
  return push(std::move(n));
}

Var Graph::max_zero(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kMaxZero;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value.cwiseMax(0.0);
  return push(std::move(n));
}

Var Graph::l2_normalize_rows(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kL2NormalizeRows;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value;
  for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
    const double norm = std::max(na.value.row(r).norm(), kNormFloor);
    n.value.row(r) /= norm;
  }
  return push(std::move(n));
}

Var Graph::row_norm(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kRowNorm;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value.rowwise().norm();
  return push(std::move(n));
}

Var Graph::row_sum(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kRowSum;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = na.value.rowwise().sum();
  return push(std::move(n));
}

Var Graph::sum(Var a) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kSum;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = Matrix::Constant(1, 1, na.value.sum());
  return push(std::move(n));
}

Var Graph::mean(Var a) {
  const Node& na = node(a);
  if (na.value.size() == 0) throw ShapeError("mean: empty operand");
  Node n;
  n.kind = OpKind::kMean;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = Matrix::Constant(1, 1, na.value.mean());
  return push(std::move(n));
}

Var Graph::gather_rows(Var a, std::vector<int> rows) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kGatherRows;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value.resize(static_cast<Eigen::Index>(rows.size()), na.value.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= na.value.rows()) {
      throw ShapeError("gather_rows: row index " + std::to_string(rows[i]) +
                       " out of range for " + shape_str(na.value));
    }
    n.value.row(static_cast<Eigen::Index>(i)) = na.value.row(rows[i]);
  }
  n.index = std::move(rows);
  return push(std::move(n));
}

Var Graph::pairwise_distances(Var a) {
  const Node& na = node(a);
  const Eigen::Index count = na.value.rows();
  Node n;
  n.kind = OpKind::kPairwiseDist;
  n.a = a.id;
  n.requires_grad = na.requires_grad;
  n.value = Matrix::Zero(count, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = i + 1; j < count; ++j) {
      const double d = (na.value.row(i) - na.value.row(j)).norm();
      n.value(i, j) = d;
      n.value(j, i) = d;
    }
  }
  return push(std::move(n));
}

const Matrix& Graph::value(Var v) const { return node(v).value; }

double Graph::scalar(Var v) const {
  const Matrix& m = node(v).value;
  if (m.rows() != 1 || m.cols() != 1) {
    throw UsageError("scalar: node is " + shape_str(m));
  }
  return m(0, 0);
}

void Graph::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Graph::backward(Var loss) {
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw UsageError("backward: loss node must be scalar, got " +
                     shape_str(root.value));
  }
  if (!std::isfinite(root.value(0, 0))) {
    throw UsageError("backward: loss is not finite");
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!root.requires_grad) return;
  nodes_[loss.id].grad = Matrix::Ones(1, 1);
  for (int id = loss.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (n.kind == OpKind::kLeaf || n.grad.size() == 0) continue;
    backprop_node(n);
  }
}

void Graph::backprop_node(const Node& n) {
  const Matrix& g = n.grad;
  const Matrix& av = nodes_[n.a].value;
  switch (n.kind) {
    case OpKind::kLeaf:
      break;
    case OpKind::kMatMul: {
      const Matrix& bv = nodes_[n.b].value;
      if (nodes_[n.a].requires_grad) accumulate(n.a, g * bv.transpose());
      if (nodes_[n.b].requires_grad) accumulate(n.b, av.transpose() * g);
      break;
    }
    case OpKind::kAddRowVec:
      accumulate(n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(n.b, g.colwise().sum());
      break;
    case OpKind::kAdd:
      accumulate(n.a, g);
      accumulate(n.b, g);
      break;
    case OpKind::kSub:
      accumulate(n.a, g);
      if (nodes_[n.b].requires_grad) accumulate(n.b, -g);
      break;
    case OpKind::kMul: {
      const Matrix& bv = nodes_[n.b].value;
      if (nodes_[n.a].requires_grad) accumulate(n.a, g.cwiseProduct(bv));
      if (nodes_[n.b].requires_grad) accumulate(n.b, g.cwiseProduct(av));
      break;
    }
    case OpKind::kScale:
      accumulate(n.a, g * n.c0);
      break;
    case OpKind::kAddScalar:
      accumulate(n.a, g);
      break;
    case OpKind::kRelu:
    case OpKind::kMaxZero:
      accumulate(n.a, Matrix((av.array() > 0.0).select(g.array(), 0.0)));
      break;
    case OpKind::kSigmoid:
      accumulate(n.a, g.cwiseProduct(
                          n.value.cwiseProduct((1.0 - n.value.array()).matrix())));
      break;
    case OpKind::kSoftmaxRows: {
      const Vector dots = g.cwiseProduct(n.value).rowwise().sum();
      Matrix ga = n.value.cwiseProduct((g.colwise() - dots));
      accumulate(n.a, ga);
      break;
    }
    case OpKind::kLogSoftmaxRows: {
      const Matrix probs = n.value.array().exp().matrix();
      const Vector totals = g.rowwise().sum();
      Matrix ga = g - probs.cwiseProduct(totals.replicate(1, g.cols()));
      accumulate(n.a, ga);
      break;
    }
    case OpKind::kLog:
      accumulate(n.a, g.cwiseQuotient(av));
      break;
    case OpKind::kExp:
      accumulate(n.a, g.cwiseProduct(n.value));
      break;
    case OpKind::kPow: {
      const double c = n.c0;
      accumulate(n.a, g.cwiseProduct(
                          av.unaryExpr([c](double x) { return c * std::pow(x, c - 1.0); })));
      break;
    }
    case OpKind::kClamp: {
      const double lo = n.c0;
      const double hi = n.c1;
      Matrix ga = g;
      for (Eigen::Index i = 0; i < ga.size(); ++i) {
        const double x = av(i);
        if (x < lo || x > hi) ga(i) = 0.0;
      }
      accumulate(n.a, ga);
      break;
    }
    case OpKind::kL2NormalizeRows: {
      Matrix ga(av.rows(), av.cols());
      for (Eigen::Index r = 0; r < av.rows(); ++r) {
        const double norm = std::max(av.row(r).norm(), kNormFloor);
        const double proj = g.row(r).dot(n.value.row(r));
        ga.row(r) = (g.row(r) - proj * n.value.row(r)) / norm;
      }
      accumulate(n.a, ga);
      break;
    }
    case OpKind::kRowNorm: {
      Matrix ga(av.rows(), av.cols());
      for (Eigen::Index r = 0; r < av.rows(); ++r) {
        const double norm = n.value(r, 0);
        if (norm < kNormFloor) {
          ga.row(r).setZero();
        } else {
          ga.row(r) = av.row(r) * (g(r, 0) / norm);
        }
      }
      accumulate(n.a, ga);
      break;
    }
    case OpKind::kRowSum:
      accumulate(n.a, g.col(0).replicate(1, av.cols()));
      break;
    case OpKind::kSum:
      accumulate(n.a, Matrix::Constant(av.rows(), av.cols(), g(0, 0)));
      break;
    case OpKind::kMean:
      accumulate(n.a, Matrix::Constant(av.rows(), av.cols(),
                                       g(0, 0) / static_cast<double>(av.size())));
      break;
    case OpKind::kGatherRows: {
      Matrix ga = Matrix::Zero(av.rows(), av.cols());
      for (std::size_t i = 0; i < n.index.size(); ++i) {
        ga.row(n.index[i]) += g.row(static_cast<Eigen::Index>(i));
      }
      accumulate(n.a, ga);
      break;
    }
    case OpKind::kPairwiseDist: {
      Matrix ga = Matrix::Zero(av.rows(), av.cols());
      for (Eigen::Index i = 0; i < av.rows(); ++i) {
        for (Eigen::Index j = 0; j < av.rows(); ++j) {
          if (i == j) continue;
          const double d = n.value(i, j);
          if (d < kNormFloor) continue;
          const double w = (g(i, j) + g(j, i)) / d;
          ga.row(i) += w * (av.row(i) - av.row(j));
        }
      }
      accumulate(n.a, ga);
      break;
    }
  }
}

Matrix Graph::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

}  // namespace ala::core
