#include "ucgrad/idx.hpp"

#include <fstream>

namespace ucgrad::idx {

namespace {

constexpr std::uint32_t kLabelMagic = 0x00000801u;
constexpr std::uint32_t kImageMagic = 0x00000803u;

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("idx: cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, size_t off, const std::string& origin) {
  if (off + 4 > b.size()) throw Error("idx: truncated header in " + origin);
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

std::vector<int> parse_labels(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  const std::uint32_t magic = be32(bytes, 0, origin);
  if (magic != kLabelMagic)
    throw Error("idx: bad label magic in " + origin + " (got 0x" + std::to_string(magic) + ")");
  const std::uint32_t n = be32(bytes, 4, origin);
  if (bytes.size() < 8 + n) throw Error("idx: truncated label data in " + origin);
  std::vector<int> labels(n);
  for (std::uint32_t i = 0; i < n; ++i) labels[i] = bytes[8 + i];
  return labels;
}

Images parse_images(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  const std::uint32_t magic = be32(bytes, 0, origin);
  if (magic != kImageMagic)
    throw Error("idx: bad image magic in " + origin + " (got 0x" + std::to_string(magic) + ")");
  Images out;
  out.count = static_cast<int>(be32(bytes, 4, origin));
  out.rows = static_cast<int>(be32(bytes, 8, origin));
  out.cols = static_cast<int>(be32(bytes, 12, origin));
  const size_t pixels = static_cast<size_t>(out.count) * out.rows * out.cols;
  if (bytes.size() < 16 + pixels) throw Error("idx: truncated image data in " + origin);
  out.data.resize(out.count, out.rows * out.cols);
  for (int i = 0; i < out.count; ++i)
    for (int p = 0; p < out.rows * out.cols; ++p)
      out.data(i, p) =
          bytes[16 + static_cast<size_t>(i) * out.rows * out.cols + static_cast<size_t>(p)] / 255.0;
  return out;
}

std::vector<int> load_labels(const std::string& path) {
  return parse_labels(read_file(path), path);
}

Images load_images(const std::string& path) { return parse_images(read_file(path), path); }

}  // namespace ucgrad::idx
