#pragma once

#include "ee/embedder.hpp"

#include <string>

namespace ee {

// Binary checkpoint, all integers and floats little-endian:
//
//   offset  size  field
//   0       8     magic "EECKPT01"
//   8       4     u32 format version (1)
//   12      4     u32 architecture (0 linear, 1 mlp)
//   16      4     u32 activation (0 relu, 1 tanh)
//   20      4     u32 normalize_output (0/1)
//   24      8     u64 input_dim
//   32      8     u64 embed_dim
//   40      8     u64 hidden_width
//   48      8     u64 parameter count P
//   then P blocks: u64 rows, u64 cols, rows*cols f64 row-major
inline constexpr char kCheckpointMagic[8] = {'E', 'E', 'C', 'K', 'P', 'T', '0', '1'};
inline constexpr unsigned kCheckpointVersion = 1;

void save_checkpoint(const Embedder& model, const std::string& path);
Embedder load_checkpoint(const std::string& path);

} // namespace ee
