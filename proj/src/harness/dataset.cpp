#include "ala/harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "ala/core/rng.hpp"

namespace ala::harness {

namespace {

constexpr std::uint64_t kStreamMeans = 11;
constexpr std::uint64_t kStreamSplit = 12;
constexpr std::uint64_t kStreamNoise = 13;

Vector random_unit(Rng& rng, int dim) {
  Vector v(dim);
  for (int k = 0; k < dim; ++k) v(k) = normal(rng);
  const double n = v.norm();
  return n > 0.0 ? Vector(v / n) : Vector(Vector::Unit(dim, 0));
}

Matrix class_means(const DatasetSpec& spec) {
  Rng rng(derive_seed(spec.seed, kStreamMeans));
  const int k = spec.num_classes;
  Matrix means = Matrix::Zero(k, spec.dim);
  const double gap = 8.0 * (1.0 - spec.overlap);
  if (spec.kind == "confusable-gaussians") {
    for (int c = 0; c < k; c += 2) {
      const Vector center = 8.0 * random_unit(rng, spec.dim);
      const Vector axis = random_unit(rng, spec.dim);
      means.row(c) = (center - 0.5 * gap * axis).transpose();
      if (c + 1 < k) means.row(c + 1) = (center + 0.5 * gap * axis).transpose();
    }
  } else if (spec.kind == "imbalanced-binary") {
    means.row(1) = (gap * random_unit(rng, spec.dim)).transpose();
  } else {
    const double scale = 4.0 * (1.0 - spec.overlap);
    for (int c = 0; c < k; ++c) {
      for (int d = 0; d < spec.dim; ++d) means(c, d) = scale * normal(rng);
    }
  }
  return means;
}

LabeledSet sample_split(const DatasetSpec& spec, const Matrix& means, int n, Rng& rng) {
  const std::vector<int> counts = class_counts(spec, n);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < spec.num_classes; ++c) labels.insert(labels.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(c)]), c);
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[uniform_index(rng, i)]);
  }
  LabeledSet set;
  set.num_classes = spec.num_classes;
  set.x.resize(n, spec.dim);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < spec.dim; ++d) {
      set.x(i, d) = means(labels[static_cast<std::size_t>(i)], d) + normal(rng);
    }
  }
  set.y = std::move(labels);
  return set;
}

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError(path.string() + ": truncated header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

void DatasetSpec::validate() const {
  static const std::set<std::string> kinds = {"confusable-gaussians", "imbalanced-binary",
                                              "embedding-clusters"};
  if (!kinds.count(kind)) throw UsageError("unknown dataset kind '" + kind + "'");
  if (num_classes < 2) throw UsageError("dataset needs at least 2 classes");
  if (kind == "imbalanced-binary" && num_classes != 2) {
    throw UsageError("imbalanced-binary has exactly 2 classes");
  }
  if (dim < 1) throw UsageError("dataset dim must be >= 1");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw UsageError("overlap must be in [0, 1]");
  if (!(imbalance >= 1.0)) throw UsageError("imbalance ratio must be >= 1");
  if (!(label_noise >= 0.0 && label_noise < 1.0)) throw UsageError("label_noise must be in [0, 1)");
  for (int n : {n_train, n_val, n_test}) {
    const auto counts = class_counts(*this, n);
    if (*std::min_element(counts.begin(), counts.end()) < 1) {
      throw UsageError("every split needs at least one example per class");
    }
  }
}

std::vector<int> class_counts(const DatasetSpec& spec, int n) {
  std::vector<int> counts(static_cast<std::size_t>(spec.num_classes), 0);
  if (n <= 0) return counts;
  if (spec.kind == "imbalanced-binary") {
    const int pos = static_cast<int>(std::lround(static_cast<double>(n) / (spec.imbalance + 1.0)));
    counts = {n - pos, pos};
    return counts;
  }
  for (int c = 0; c < spec.num_classes; ++c) {
    counts[static_cast<std::size_t>(c)] = n / spec.num_classes + (c < n % spec.num_classes ? 1 : 0);
  }
  return counts;
}

nlohmann::json DatasetSpec::to_json() const {
  return {{"kind", kind},       {"num_classes", num_classes}, {"dim", dim},
          {"overlap", overlap}, {"imbalance", imbalance},     {"label_noise", label_noise},
          {"n_train", n_train}, {"n_val", n_val},             {"n_test", n_test},
          {"seed", seed}};
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"kind",      "num_classes", "dim",   "overlap",
                                              "imbalance", "label_noise", "n_train", "n_val",
                                              "n_test",    "seed"};
  if (!j.is_object()) throw UsageError("dataset spec must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw UsageError("unknown dataset key '" + item.key() + "'");
  }
  DatasetSpec s;
  try {
    s.kind = j.value("kind", s.kind);
    if (s.kind == "imbalanced-binary") s.num_classes = 2;
    s.num_classes = j.value("num_classes", s.num_classes);
    s.dim = j.value("dim", s.dim);
    s.overlap = j.value("overlap", s.overlap);
    s.imbalance = j.value("imbalance", s.imbalance);
    s.label_noise = j.value("label_noise", s.label_noise);
    s.n_train = j.value("n_train", s.n_train);
    s.n_val = j.value("n_val", s.n_val);
    s.n_test = j.value("n_test", s.n_test);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid dataset value: ") + e.what());
  }
  s.validate();
  return s;
}

DatasetSplits generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  const Matrix means = class_means(spec);
  DatasetSplits out;
  out.spec = spec;
  Rng rng(derive_seed(spec.seed, kStreamSplit));
  out.train = sample_split(spec, means, spec.n_train, rng);
  out.val = sample_split(spec, means, spec.n_val, rng);
  out.test = sample_split(spec, means, spec.n_test, rng);
  if (spec.label_noise > 0.0) {
    apply_label_noise(out.train, spec.label_noise, derive_seed(spec.seed, kStreamNoise));
  }
  return out;
}

void apply_label_noise(LabeledSet& set, double p, std::uint64_t seed) {
  Rng rng(seed);
  for (int& y : set.y) {
    if (uniform01(rng) >= p) continue;
    const int other = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(set.num_classes - 1)));
    y = other >= y ? other + 1 : other;
  }
}

Matrix read_idx_images(const std::filesystem::path& path, int limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (read_be32(in, path) != 0x00000803) throw IoError(path.string() + ": not an IDX image file");
  auto n = static_cast<int>(read_be32(in, path));
  const auto rows = static_cast<int>(read_be32(in, path));
  const auto cols = static_cast<int>(read_be32(in, path));
  if (limit > 0) n = std::min(n, limit);
  Matrix x(n, rows * cols);
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows * cols));
  for (int i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw IoError(path.string() + ": truncated image data");
    }
    for (int k = 0; k < rows * cols; ++k) x(i, k) = buf[static_cast<std::size_t>(k)] / 255.0;
  }
  return x;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path, int limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (read_be32(in, path) != 0x00000801) throw IoError(path.string() + ": not an IDX label file");
  auto n = static_cast<int>(read_be32(in, path));
  if (limit > 0) n = std::min(n, limit);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw IoError(path.string() + ": truncated labels");
    y[static_cast<std::size_t>(i)] = c;
  }
  return y;
}

}  // namespace ala::harness
