#include "ccep/statestore/checkpoint.hpp"

#include <algorithm>
#include <array>

#include "ccep/core/error.hpp"

namespace ccep {

namespace {
constexpr std::array<std::uint8_t, 4> kMagic{'C', 'T', 'P', '1'};
constexpr std::size_t kHeader = kMagic.size() + 8;
}  // namespace

Bytes encode_checkpoint(const TypeCheckpoint& cp) {
  Bytes out(kMagic.begin(), kMagic.end());
  std::uint64_t n = cp.state.buffered_count();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  nlohmann::json j{{"state", to_json(cp.state)},
                   {"next_offsets", cp.next_offsets},
                   {"recent_ids", cp.recent_ids},
                   {"epoch", cp.epoch}};
  nlohmann::json::to_cbor(j, out);
  return out;
}

std::uint64_t peek_buffered_count(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw DecodeError("checkpoint: bad header");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(bytes[kMagic.size() + i]) << (8 * i);
  return n;
}

TypeCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  auto count = peek_buffered_count(bytes);
  auto j = nlohmann::json::from_cbor(bytes.begin() + kHeader, bytes.end(), true, false);
  if (j.is_discarded()) throw DecodeError("checkpoint: malformed CBOR body");
  TypeCheckpoint cp;
  try {
    cp.state = context_state_from_json(j.at("state"));
    cp.next_offsets = j.at("next_offsets").get<std::map<std::string, std::uint64_t>>();
    cp.recent_ids = j.at("recent_ids").get<std::vector<std::string>>();
    cp.epoch = j.at("epoch").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw DecodeError(std::string("checkpoint: ") + ex.what());
  }
  if (cp.state.buffered_count() != count) throw DecodeError("checkpoint: header count mismatch");
  return cp;
}

}  // namespace ccep
