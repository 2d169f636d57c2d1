#include "bregman/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace bregman {

namespace {

constexpr char kMagic[8] = {'B', 'R', 'E', 'G', 'M', 'O', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size, std::string path)
      : data_(data), size_(size), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[at_ + i]) << (8 * i);
    at_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[at_ + i]) << (8 * i);
    at_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  void raw(void* dst, std::size_t bytes) {
    need(bytes);
    std::memcpy(dst, data_ + at_, bytes);
    at_ += bytes;
  }

  std::size_t remaining() const { return size_ - at_; }

 private:
  void need(std::size_t bytes) {
    if (at_ + bytes > size_) {
      throw ParseError("model file " + path_ + ": truncated (wanted " + std::to_string(bytes) +
                       " bytes at offset " + std::to_string(at_) + ")");
    }
  }

  const unsigned char* data_;
  std::size_t size_;
  std::size_t at_ = 0;
  std::string path_;
};

void append_block(std::vector<unsigned char>& out, const std::vector<double>& values) {
  for (double v : values) put_f64(out, v);
}

std::vector<double> read_block(Reader& r, std::size_t count) {
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = r.f64();
  return values;
}

}  // namespace

void save_model(const std::filesystem::path& path, const MlpEncoder& encoder,
                const ClassifierHead& head, const GnmPhi& phi, std::uint64_t seed) {
  std::vector<unsigned char> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(encoder.layers.size()));
  for (const DenseLayer& layer : encoder.layers) {
    put_u32(out, static_cast<std::uint32_t>(layer.weight.rows()));
    put_u32(out, static_cast<std::uint32_t>(layer.weight.cols()));
  }
  put_u32(out, static_cast<std::uint32_t>(head.weight.rows()));
  put_u32(out, static_cast<std::uint32_t>(phi.units()));
  put_u32(out, static_cast<std::uint32_t>(encoder.output_dim()));
  put_f64(out, phi.eps_quad);
  put_u64(out, seed);
  for (const DenseLayer& layer : encoder.layers) {
    append_block(out, layer.weight.storage());
    append_block(out, layer.bias);
  }
  append_block(out, head.weight.storage());
  append_block(out, head.bias);
  append_block(out, phi.beta.storage());
  append_block(out, phi.bias);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ParseError("save_model: cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw ParseError("save_model: write failed for " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ParseError("load_model: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                   std::istreambuf_iterator<char>());
  Reader r(bytes.data(), bytes.size(), path.string());

  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("load_model: " + path.string() + " is not a model file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw ParseError("load_model: unsupported format version " + std::to_string(version));
  }
  const std::uint32_t n_layers = r.u32();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    shapes.emplace_back(rows, cols);
  }
  const std::uint32_t class_count = r.u32();
  const std::uint32_t m = r.u32();
  const std::uint32_t d = r.u32();
  const double eps_quad = r.f64();
  const std::uint64_t seed = r.u64();

  if (n_layers == 0) throw ParseError("load_model: encoder has no layers");
  for (std::size_t l = 0; l + 1 < shapes.size(); ++l) {
    if (shapes[l].first != shapes[l + 1].second) {
      throw ParseError("load_model: encoder layer shapes do not chain");
    }
  }
  if (shapes.back().first != d) {
    throw ParseError("load_model: declared d does not match final encoder layer");
  }

  LoadedModel model;
  model.seed = seed;
  for (const auto& [rows, cols] : shapes) {
    DenseLayer layer{Matrix(rows, cols), Vector(rows)};
    layer.weight.storage() = read_block(r, static_cast<std::size_t>(rows) * cols);
    layer.bias = read_block(r, rows);
    model.encoder.layers.push_back(std::move(layer));
  }
  model.head.weight = Matrix(class_count, d);
  model.head.weight.storage() = read_block(r, static_cast<std::size_t>(class_count) * d);
  model.head.bias = read_block(r, class_count);
  Matrix beta(m, d);
  beta.storage() = read_block(r, static_cast<std::size_t>(m) * d);
  Vector bias = read_block(r, m);
  model.phi = GnmPhi(std::move(beta), std::move(bias), eps_quad);
  if (r.remaining() != 0) {
    throw ParseError("load_model: " + path.string() + " has " + std::to_string(r.remaining()) +
                     " trailing bytes");
  }
  return model;
}

}  // namespace bregman
