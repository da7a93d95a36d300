#include "smartmixed/mnist.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "smartmixed/errors.hpp"

namespace smartmixed {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  // 16 + MAX_WBITS: expect a gzip wrapper
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    throw IoError("zlib: inflateInit2 failed");
  }
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  zs.next_in = const_cast<std::uint8_t*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int ret = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    ret = inflate(&zs, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("zlib: corrupt gzip stream");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  } while (ret != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open '" + path + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
    return gunzip(bytes);
  }
  return bytes;
}

RawImages parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) {
    throw TruncationError("IDX image header truncated");
  }
  if (read_be32(bytes.data()) != kImageMagic) {
    throw FormatError("bad IDX image magic");
  }
  RawImages raw;
  raw.count = read_be32(bytes.data() + 4);
  raw.rows = read_be32(bytes.data() + 8);
  raw.cols = read_be32(bytes.data() + 12);
  const std::size_t expected = raw.count * raw.rows * raw.cols;
  if (bytes.size() != 16 + expected) {
    throw TruncationError("IDX image payload has " +
                          std::to_string(bytes.size() - 16) +
                          " bytes, expected " + std::to_string(expected));
  }
  raw.pixels.assign(bytes.begin() + 16, bytes.end());
  return raw;
}

std::vector<std::size_t> parse_idx_labels(
    const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8) {
    throw TruncationError("IDX label header truncated");
  }
  if (read_be32(bytes.data()) != kLabelMagic) {
    throw FormatError("bad IDX label magic");
  }
  const std::size_t count = read_be32(bytes.data() + 4);
  if (bytes.size() != 8 + count) {
    throw TruncationError("IDX label payload has " +
                          std::to_string(bytes.size() - 8) +
                          " bytes, expected " + std::to_string(count));
  }
  std::vector<std::size_t> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t v = bytes[8 + i];
    if (v >= kMnistClasses) {
      throw LabelError("label " + std::to_string(int(v)) + " out of range");
    }
    labels[i] = v;
  }
  return labels;
}

std::vector<std::uint8_t> serialize_idx_images(const RawImages& raw) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + raw.pixels.size());
  write_be32(out, kImageMagic);
  write_be32(out, static_cast<std::uint32_t>(raw.count));
  write_be32(out, static_cast<std::uint32_t>(raw.rows));
  write_be32(out, static_cast<std::uint32_t>(raw.cols));
  out.insert(out.end(), raw.pixels.begin(), raw.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(
    const std::vector<std::size_t>& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (std::size_t v : labels) {
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

Matrix normalize_flatten(const RawImages& raw) {
  const std::size_t dim = raw.rows * raw.cols;
  Matrix images(raw.count, dim);
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    images.data[i] = raw.pixels[i] / 255.0;
  }
  return images;
}

Dataset load_mnist_pair(const std::string& images_path,
                        const std::string& labels_path,
                        const std::string& name) {
  RawImages raw = parse_idx_images(read_maybe_gzip(images_path));
  std::vector<std::size_t> labels =
      parse_idx_labels(read_maybe_gzip(labels_path));
  if (labels.size() != raw.count) {
    throw FormatError("image/label counts differ (" +
                      std::to_string(raw.count) + " vs " +
                      std::to_string(labels.size()) + ")");
  }
  Dataset ds;
  ds.images = normalize_flatten(raw);
  ds.labels = std::move(labels);
  ds.name = name;
  return ds;
}

namespace {

std::string find_mnist_file(const std::string& dir, const std::string& stem) {
  namespace fs = std::filesystem;
  for (const char* suffix : {"", ".gz"}) {
    fs::path p = fs::path(dir) / (stem + suffix);
    if (fs::exists(p)) {
      return p.string();
    }
  }
  throw IoError("MNIST file '" + stem + "[.gz]' not found in '" + dir + "'");
}

}  // namespace

std::pair<Dataset, Dataset> load_mnist_dir(const std::string& dir) {
  Dataset train = load_mnist_pair(
      find_mnist_file(dir, "train-images-idx3-ubyte"),
      find_mnist_file(dir, "train-labels-idx1-ubyte"), "mnist-train");
  Dataset test = load_mnist_pair(
      find_mnist_file(dir, "t10k-images-idx3-ubyte"),
      find_mnist_file(dir, "t10k-labels-idx1-ubyte"), "mnist-test");
  return {std::move(train), std::move(test)};
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx,
               const std::string& name) {
  Dataset out;
  out.images = Matrix(idx.size(), ds.images.cols);
  out.labels.resize(idx.size());
  out.name = name;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::memcpy(out.images.row(r), ds.images.row(idx[r]),
                ds.images.cols * sizeof(double));
    out.labels[r] = ds.labels[idx[r]];
  }
  return out;
}

namespace {

/// Chooses the per-class validation counts: round(f * N_c), then +-1
/// adjustments over the largest classes until the total is exactly
/// round(f * N).
std::vector<std::size_t> validation_take_counts(
    const std::vector<std::vector<std::size_t>>& by_class, double fraction) {
  const std::size_t classes = by_class.size();
  std::size_t total = 0;
  for (const auto& ix : by_class) total += ix.size();
  const auto target =
      static_cast<std::ptrdiff_t>(std::llround(fraction * double(total)));

  std::vector<std::size_t> take(classes);
  std::ptrdiff_t sum = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    take[c] = static_cast<std::size_t>(
        std::llround(fraction * double(by_class[c].size())));
    sum += static_cast<std::ptrdiff_t>(take[c]);
  }

  // Classes in descending size, ties to the lower class id.
  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return by_class[a].size() > by_class[b].size();
                   });
  std::size_t cursor = 0;
  while (sum != target) {
    const std::size_t c = order[cursor % classes];
    ++cursor;
    if (sum > target && take[c] > 0) {
      --take[c];
      --sum;
    } else if (sum < target && take[c] < by_class[c].size()) {
      ++take[c];
      ++sum;
    }
  }
  return take;
}

}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             const SplitSpec& spec) {
  if (!(spec.val_fraction > 0.0 && spec.val_fraction < 1.0)) {
    throw ConfigError("val_fraction must be in (0,1)");
  }
  std::vector<std::vector<std::size_t>> by_class(kMnistClasses);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[ds.labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < kMnistClasses; ++c) {
    if (by_class[c].size() == 1) {
      throw StratifyError("class " + std::to_string(c) +
                          " has fewer than 2 samples");
    }
  }
  const std::vector<std::size_t> take =
      validation_take_counts(by_class, spec.val_fraction);

  Rng root(spec.seed);
  std::vector<std::size_t> val_idx;
  std::vector<char> is_val(ds.size(), 0);
  for (std::size_t c = 0; c < kMnistClasses; ++c) {
    Rng class_rng = root.child(c);
    std::vector<std::size_t> pick =
        rng_permutation(class_rng, by_class[c].size());
    for (std::size_t k = 0; k < take[c]; ++k) {
      const std::size_t idx = by_class[c][pick[k]];
      val_idx.push_back(idx);
      is_val[idx] = 1;
    }
  }
  std::sort(val_idx.begin(), val_idx.end());
  std::vector<std::size_t> train_idx;
  train_idx.reserve(ds.size() - val_idx.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!is_val[i]) train_idx.push_back(i);
  }
  return {subset(ds, train_idx, ds.name + "-train"),
          subset(ds, val_idx, ds.name + "-val")};
}

Dataset stratified_subsample(const Dataset& ds, std::size_t n,
                             std::uint64_t seed) {
  if (n >= ds.size()) {
    return ds;
  }
  // Reuse the split machinery: "validation" of size n is the subsample.
  SplitSpec spec;
  spec.val_fraction = static_cast<double>(n) / static_cast<double>(ds.size());
  spec.seed = seed;
  auto [rest, sample] = stratified_split(ds, spec);
  (void)rest;
  sample.name = ds.name + "-sub" + std::to_string(n);
  return sample;
}

std::vector<Batch> batches(const Dataset& ds, std::size_t batch_size,
                           Rng& rng) {
  if (batch_size < 1) {
    throw ConfigError("batch_size must be >= 1");
  }
  std::vector<std::size_t> perm = rng_permutation(rng, ds.size());
  std::vector<Batch> out;
  for (std::size_t start = 0; start < perm.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, perm.size());
    Batch b;
    b.x = Matrix(end - start, ds.images.cols);
    b.labels.resize(end - start);
    for (std::size_t r = 0; r < end - start; ++r) {
      std::memcpy(b.x.row(r), ds.images.row(perm[start + r]),
                  ds.images.cols * sizeof(double));
      b.labels[r] = ds.labels[perm[start + r]];
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace smartmixed
