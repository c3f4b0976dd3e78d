#ifndef BINNET_MODEL_IO_HPP
#define BINNET_MODEL_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "binnet/netgraph.hpp"

namespace binnet {

// ---------------------------------------------------------------------------
// "BNNM" model file, version 1, little-endian throughout, no alignment
// padding:
//   magic "BNNM" | u16 version | u16 top-level layer count
//   metadata: u32 name length + UTF-8 bytes, u32 label count,
//             per label u32 length + bytes
//   per layer: u8 tag, shape fields as u32, payload (weight words u64
//              LSB-first, thresholds i32, flips u8, head weights/bias f32)
//   trailing u32 CRC32 (IEEE) of every preceding byte
// Branch sub-sequences nest recursively inside the Branches payload.
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize_model(const ModelGraph& graph);

// Throws FormatError with kind BadMagic / BadVersion / Checksum / Truncated /
// Malformed; never crashes on arbitrary bytes.
ModelGraph deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const ModelGraph& graph, const std::string& path);
ModelGraph load_model(const std::string& path);

} // namespace binnet

#endif
