#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "ala/orchestrator/data.hpp"

namespace ala::harness {

using orchestrator::LabeledSet;

/// Synthetic data generators:
///   confusable-gaussians  classes come in pairs (0,1), (2,3), ...; the two
///                         means of a pair sit 8·(1 − overlap) apart, pairs
///                         are far from each other.
///   imbalanced-binary     two Gaussians with `imbalance` negatives per
///                         positive; means 8·(1 − overlap) apart.
///   embedding-clusters    `num_classes` Gaussian clusters with random means
///                         of scale 4·(1 − overlap).
/// All with unit isotropic noise.
struct DatasetSpec {
  std::string kind = "confusable-gaussians";
  int num_classes = 8;
  int dim = 16;
  double overlap = 0.5;
  double imbalance = 10.0;
  double label_noise = 0.0;  // training split only
  int n_train = 2000;
  int n_val = 1000;
  int n_test = 2000;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static DatasetSpec from_json(const nlohmann::json& j);
};

struct DatasetSplits {
  DatasetSpec spec;
  LabeledSet train;
  LabeledSet val;
  LabeledSet test;
};

/// Pure function of the spec (including its seed).
DatasetSplits generate_dataset(const DatasetSpec& spec);

/// Per-class counts for a split of n examples: balanced, or for
/// imbalanced-binary {n − round(n/(r+1)), round(n/(r+1))}.
std::vector<int> class_counts(const DatasetSpec& spec, int n);

/// Flips each label to a uniformly drawn different class with probability p.
void apply_label_noise(LabeledSet& set, double p, std::uint64_t seed);

/// IDX (MNIST-style) files: unsigned-byte images scaled to [0, 1], one row
/// per image, and unsigned-byte labels. `limit` > 0 keeps the first
/// `limit` items. IoError on malformed files.
Matrix read_idx_images(const std::filesystem::path& path, int limit = 0);
std::vector<int> read_idx_labels(const std::filesystem::path& path, int limit = 0);

}  // namespace ala::harness
