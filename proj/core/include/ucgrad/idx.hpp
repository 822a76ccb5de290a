#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucgrad/common.hpp"

namespace ucgrad::idx {

// 2-D image tensor read from an IDX file (magic 0x00000803), pixels scaled
// to [0, 1].
struct Images {
  int count = 0;
  int rows = 0;
  int cols = 0;
  Matrix data;  // count x (rows*cols)
};

// Label vector read from an IDX file (magic 0x00000801).
std::vector<int> load_labels(const std::string& path);
Images load_images(const std::string& path);

// In-memory variants, used by the file loaders and directly by tests.
std::vector<int> parse_labels(const std::vector<std::uint8_t>& bytes, const std::string& origin);
Images parse_images(const std::vector<std::uint8_t>& bytes, const std::string& origin);

}  // namespace ucgrad::idx
