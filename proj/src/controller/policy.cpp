#include "ala/controller/policy.hpp"

#include <cmath>
#include <utility>

#include "ala/core/checkpoint.hpp"
#include "ala/core/graph.hpp"

namespace ala::controller {

namespace {

core::NetworkSpec policy_spec(const ObservationLayout& layout, int depth, int width) {
  if (depth < 1) throw UsageError("policy depth must be >= 1");
  if (width < 1) throw UsageError("policy width must be >= 1");
  core::NetworkSpec spec;
  spec.sizes.push_back(layout.size());
  for (int k = 0; k < depth; ++k) spec.sizes.push_back(width);
  spec.sizes.push_back(kNumActions);
  spec.hidden = core::Activation::kRelu;
  spec.head = core::Head::kSoftmax;
  return spec;
}

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) total += std::exp(logits(r, c) - mx);
    out.row(r) = logits.row(r).array() - (mx + std::log(total));
  }
  return out;
}

Matrix stack_states(std::span<const Episode> batch, int width) {
  Matrix obs(static_cast<Eigen::Index>(batch.size()), width);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (static_cast<int>(batch[i].state.size()) != width) {
      throw ShapeError("episode state has " + std::to_string(batch[i].state.size()) +
                       " entries, policy expects " + std::to_string(width));
    }
    for (int k = 0; k < width; ++k) {
      obs(static_cast<Eigen::Index>(i), k) = batch[i].state[static_cast<std::size_t>(k)];
    }
  }
  return obs;
}

// Builds J on a graph; returns the objective node and the bound parameters.
std::pair<core::Var, core::BoundParams> objective_graph(core::Graph& g,
                                                        const PolicyNetwork& policy,
                                                        std::span<const Episode> batch,
                                                        double baseline) {
  const int width = policy.layout().size();
  core::BoundParams bound = policy.network().bind(g);
  core::Var input = g.constant(stack_states(batch, width));
  core::Var logp = g.log_softmax_rows(policy.network().forward_logits(g, bound, input));
  Matrix weights = Matrix::Zero(static_cast<Eigen::Index>(batch.size()), kNumActions);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int a = batch[i].action;
    if (a < 0 || a >= kNumActions) throw InputError("episode action out of range");
    weights(static_cast<Eigen::Index>(i), a) =
        advantage(batch[i], baseline) / static_cast<double>(batch.size());
  }
  core::Var objective = g.sum(g.mul(logp, g.constant(std::move(weights))));
  return {objective, std::move(bound)};
}

}  // namespace

PolicyNetwork::PolicyNetwork(ObservationLayout layout, const PolicyConfig& config,
                             std::uint64_t seed)
    : layout_(layout),
      net_(policy_spec(layout, config.depth, config.width), seed),
      beta_(config.beta),
      optimizer_(config.optimizer, net_.parameters()) {
  if (!(beta_ > 0.0)) throw UsageError("policy step β must be > 0");
}

PolicyNetwork::PolicyNetwork(ObservationLayout layout, core::Network net, double beta,
                             core::OptimizerConfig optimizer)
    : layout_(layout), net_(std::move(net)), beta_(beta), optimizer_(optimizer, net_.parameters()) {
  if (net_.spec().input_dim() != layout_.size() || net_.spec().output_dim() != kNumActions) {
    throw LoadError("policy network shape does not match its observation layout");
  }
}

void PolicyNetwork::check(const Matrix& observations) const {
  if (observations.cols() != layout_.size()) {
    throw UsageError("observation has " + std::to_string(observations.cols()) +
                     " entries, policy layout expects " + std::to_string(layout_.size()));
  }
}

Matrix PolicyNetwork::log_probabilities(const Matrix& observations) const {
  check(observations);
  return log_softmax(net_.predict_logits(observations));
}

Matrix PolicyNetwork::probabilities(const Matrix& observations) const {
  return log_probabilities(observations).array().exp().matrix();
}

std::vector<SampledAction> sample_actions(const PolicyNetwork& policy, const Matrix& observations,
                                          Rng& rng) {
  const Matrix logp = policy.log_probabilities(observations);
  std::vector<SampledAction> out(static_cast<std::size_t>(observations.rows()));
  for (Eigen::Index r = 0; r < logp.rows(); ++r) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    int chosen = kNumActions - 1;
    for (int a = 0; a < kNumActions; ++a) {
      cumulative += std::exp(logp(r, a));
      if (u < cumulative) {
        chosen = a;
        break;
      }
    }
    out[static_cast<std::size_t>(r)] = {chosen, action_delta(chosen, policy.beta()),
                                        logp(r, chosen)};
  }
  return out;
}

SampledAction sample_action(const PolicyNetwork& policy, std::span<const double> observation,
                            Rng& rng) {
  Matrix obs(1, static_cast<Eigen::Index>(observation.size()));
  for (std::size_t k = 0; k < observation.size(); ++k) obs(0, static_cast<Eigen::Index>(k)) = observation[k];
  return sample_actions(policy, obs, rng).front();
}

double policy_objective(const PolicyNetwork& policy, std::span<const Episode> batch,
                        double baseline) {
  if (batch.empty()) return 0.0;
  core::Graph g;
  return g.scalar(objective_graph(g, policy, batch, baseline).first);
}

std::vector<Matrix> policy_gradient(const PolicyNetwork& policy, std::span<const Episode> batch,
                                    double baseline) {
  if (batch.empty()) throw UsageError("policy_gradient: empty batch");
  core::Graph g;
  auto [objective, bound] = objective_graph(g, policy, batch, baseline);
  g.backward(objective);
  return core::Network::gradients(g, bound);
}

UpdateResult policy_update(PolicyNetwork& policy, std::span<const Episode> batch,
                           BaselineTracker& baseline) {
  UpdateResult result;
  if (batch.empty()) return result;
  core::Graph g;
  auto [objective, bound] = objective_graph(g, policy, batch, baseline.value());
  g.backward(objective);
  std::vector<Matrix> grads = core::Network::gradients(g, bound);
  for (Matrix& m : grads) m = -m;  // ascent
  policy.optimizer().step(policy.network().parameters(), grads);

  double total = 0.0;
  for (const Episode& e : batch) total += e.reward;
  result.applied = true;
  result.objective = g.scalar(objective);
  result.mean_reward = total / static_cast<double>(batch.size());
  baseline.update(result.mean_reward);
  return result;
}

void save_policy(const std::filesystem::path& path, const PolicyNetwork& policy) {
  core::Checkpoint ckpt;
  const auto& opt = policy.network().spec();
  ckpt.header = {{"kind", "policy"},
                 {"layout", policy.layout().to_json()},
                 {"network", core::spec_to_json(opt)},
                 {"beta", policy.beta()}};
  ckpt.tensors = policy.network().parameters();
  core::save_checkpoint(path, ckpt);
}

PolicyNetwork load_policy(const std::filesystem::path& path) {
  const core::Checkpoint ckpt = core::load_checkpoint(path);
  if (ckpt.header.value("kind", "") != "policy") {
    throw LoadError(path.string() + " is not a policy checkpoint");
  }
  const ObservationLayout layout = ObservationLayout::from_json(ckpt.header.at("layout"));
  core::Network net = core::network_from_checkpoint(ckpt);
  PolicyConfig defaults;
  return PolicyNetwork(layout, std::move(net), ckpt.header.at("beta").get<double>(),
                       defaults.optimizer);
}

PolicyNetwork load_policy(const std::filesystem::path& path, const ObservationLayout& expected) {
  PolicyNetwork policy = load_policy(path);
  const ObservationLayout& got = policy.layout();
  if (!(got == expected)) {
    throw LoadError("policy layout mismatch: checkpoint " + got.to_json().dump() +
                    ", expected " + expected.to_json().dump());
  }
  return policy;
}

}  // namespace ala::controller
