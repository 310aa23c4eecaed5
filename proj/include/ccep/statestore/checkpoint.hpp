#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ccep/core/context_state.hpp"

namespace ccep {

/// Everything a worker needs to resume detection of one type: the context,
/// the next unread offset per input topic and the recently processed input
/// ids used to drop replays.
struct TypeCheckpoint {
  ContextState state;
  std::map<std::string, std::uint64_t> next_offsets;
  std::vector<std::string> recent_ids;
  std::uint64_t epoch = 0;

  bool operator==(const TypeCheckpoint&) const = default;
};

/// "CTP1", buffered count as 8 little-endian bytes, then a CBOR body.
Bytes encode_checkpoint(const TypeCheckpoint& cp);
TypeCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
/// Reads only the header. Throws DecodeError on a bad header.
std::uint64_t peek_buffered_count(std::span<const std::uint8_t> bytes);

}  // namespace ccep
