#include "ala/core/optimizer.hpp"

#include <utility>

namespace ala::core {

Optimizer::Optimizer(OptimizerConfig config, const std::vector<Tensor>& params)
    : config_(config) {
  buffers_.reserve(params.size());
  for (const Tensor& t : params) {
    buffers_.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
  }
}

void Optimizer::step(std::vector<Tensor>& params, const std::vector<Matrix>& grads) {
  if (params.size() != buffers_.size() || grads.size() != buffers_.size()) {
    throw ShapeError("optimizer: expected " + std::to_string(buffers_.size()) +
                     " tensors, got " + std::to_string(params.size()) + " params / " +
                     std::to_string(grads.size()) + " grads");
  }
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    Matrix& w = params[i].value;
    const Matrix& g = grads[i];
    Matrix& buf = buffers_[i];
    if (w.rows() != buf.rows() || w.cols() != buf.cols() || g.rows() != buf.rows() ||
        g.cols() != buf.cols()) {
      throw ShapeError("optimizer: shape mismatch for '" + params[i].name + "': param " +
                       shape_str(w) + ", grad " + shape_str(g) + ", buffer " +
                       shape_str(buf));
    }
  }
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    Matrix& w = params[i].value;
    const Matrix& g = grads[i];
    Matrix& buf = buffers_[i];
    switch (config_.rule) {
      case UpdateRule::kMomentumSgd:
        buf = config_.momentum * buf + g;
        w -= config_.learning_rate * buf;
        break;
      case UpdateRule::kRmsProp:
        buf = config_.decay * buf + (1.0 - config_.decay) * g.cwiseAbs2();
        w.array() -= config_.learning_rate * g.array() /
                     (buf.array().sqrt() + config_.epsilon);
        break;
    }
  }
}

std::string to_string(UpdateRule r) {
  return r == UpdateRule::kRmsProp ? "rmsprop" : "momentum-sgd";
}

UpdateRule update_rule_from_string(const std::string& s) {
  if (s == "momentum-sgd" || s == "sgd") return UpdateRule::kMomentumSgd;
  if (s == "rmsprop") return UpdateRule::kRmsProp;
  throw UsageError("unknown optimizer rule '" + s + "'");
}

}  // namespace ala::core
