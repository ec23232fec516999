#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tcsim {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

std::string to_hex(BytesView data);

// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

// Length-prefixed canonical encoding for every signed structure. Each item is
// written as a big-endian u32 length followed by the raw bytes, so distinct
// item sequences never collide.
class Encoder {
 public:
  explicit Encoder(std::string_view domain_tag) { put(domain_tag); }

  Encoder& put(BytesView data);
  Encoder& put(std::string_view s);
  Encoder& put_u64(std::uint64_t v);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

}  // namespace tcsim
