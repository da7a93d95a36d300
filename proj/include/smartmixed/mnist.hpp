#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smartmixed/matrix.hpp"
#include "smartmixed/rng.hpp"

namespace smartmixed {

inline constexpr std::size_t kMnistClasses = 10;

struct Dataset {
  Matrix images;  // N x 784, values in [0,1]
  std::vector<std::size_t> labels;
  std::string name;

  std::size_t size() const { return images.rows; }
};

struct SplitSpec {
  double val_fraction = 0.10;
  std::uint64_t seed = 0;
};

struct RawImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

/// Big-endian IDX image container (magic 2051). Throws FormatError on a bad
/// magic and TruncationError when the payload is short.
RawImages parse_idx_images(const std::vector<std::uint8_t>& bytes);

/// IDX label container (magic 2049); labels must be < 10.
std::vector<std::size_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes);

/// Inverses of the two parsers, for round-trip checks and test fixtures.
std::vector<std::uint8_t> serialize_idx_images(const RawImages& raw);
std::vector<std::uint8_t> serialize_idx_labels(
    const std::vector<std::size_t>& labels);

/// Reads a file, inflating it first when it starts with the gzip magic.
std::vector<std::uint8_t> read_maybe_gzip(const std::string& path);

/// Pixel bytes to rows of doubles in [0,1] (divide by 255), row-major.
Matrix normalize_flatten(const RawImages& raw);

/// Loads a (images, labels) pair; each path may point at a raw or
/// gzip-compressed IDX file.
Dataset load_mnist_pair(const std::string& images_path,
                        const std::string& labels_path,
                        const std::string& name);

/// Loads train and test sets from a directory holding the four standard
/// MNIST files (raw or with a .gz suffix).
std::pair<Dataset, Dataset> load_mnist_dir(const std::string& dir);

/// Per-class seeded sampling: round(val_fraction * N_c) validation samples
/// per class, with +-1 adjustments on the largest classes until the totals
/// match round(val_fraction * N) exactly.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             const SplitSpec& spec);

/// Stratified subsample of n samples (used by the desk-scale preset).
Dataset stratified_subsample(const Dataset& ds, std::size_t n,
                             std::uint64_t seed);

struct Batch {
  Matrix x;
  std::vector<std::size_t> labels;
};

/// One epoch of batches under a fresh seeded permutation; the final partial
/// batch is included, and every sample appears exactly once.
std::vector<Batch> batches(const Dataset& ds, std::size_t batch_size,
                           Rng& rng);

/// Rows of `ds` selected by `idx`, in that order.
Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx,
               const std::string& name);

}  // namespace smartmixed
