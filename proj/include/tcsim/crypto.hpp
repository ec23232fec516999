#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>

#include "tcsim/bytes.hpp"

namespace tcsim {

// 160-bit digest, the width of a platform configuration register.
class Digest160 {
 public:
  static constexpr std::size_t kSize = 20;

  Digest160() = default;  // all zero
  explicit Digest160(const std::array<std::uint8_t, kSize>& raw) : bytes_(raw) {}
  // Throws std::invalid_argument unless exactly 20 bytes.
  static Digest160 from_bytes(BytesView raw);
  static Digest160 from_hex(std::string_view hex);

  const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }
  BytesView view() const { return BytesView(bytes_.data(), bytes_.size()); }
  std::string hex() const { return to_hex(view()); }
  bool is_zero() const;

  auto operator<=>(const Digest160&) const = default;

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

using Digest256 = std::array<std::uint8_t, 32>;

// SHA-1; the only hash used for measurements and register extension.
Digest160 hash160(BytesView data);
inline Digest160 hash160(std::string_view s) { return hash160(to_bytes(s)); }

// SHA-256; used for certificate and message digests.
Digest256 sha256(BytesView data);
std::string sha256_hex(BytesView data);

// Seedable deterministic generator. Every random choice in a run is drawn from
// an Rng derived from the run's master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, bound); bound must be positive.
  std::uint64_t uniform(std::uint64_t bound);
  Bytes bytes(std::size_t n);
  // Independent child stream keyed by label; does not advance this stream.
  Rng fork(std::string_view label) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

struct PublicKey {
  std::string scheme_id;
  Bytes bytes;

  // Short stable identifier (hex of the SHA-256 of scheme and key bytes).
  std::string fingerprint() const;
  std::string hex() const { return to_hex(bytes); }

  auto operator<=>(const PublicKey&) const = default;
};

struct Signature {
  Bytes bytes;

  std::string hex() const { return to_hex(bytes); }
  auto operator<=>(const Signature&) const = default;
};

class KeyPair {
 public:
  KeyPair(PublicKey pub, Bytes priv) : public_(std::move(pub)), private_(std::move(priv)) {}

  const PublicKey& public_key() const { return public_; }
  const std::string& scheme_id() const { return public_.scheme_id; }
  const Bytes& private_bytes() const { return private_; }

 private:
  PublicKey public_;
  Bytes private_;
};

class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual std::string_view id() const = 0;
  virtual KeyPair keygen(Rng& rng) const = 0;
  virtual Signature sign(const KeyPair& key, BytesView message) const = 0;
  // Never throws; malformed keys or signatures simply fail.
  virtual bool verify(const PublicKey& key, BytesView message, const Signature& sig) const = 0;
};

// Ed25519 (libsodium). Deterministic signatures, 128-bit security level.
const SignatureScheme& ed25519_scheme();

// Looks a scheme up by id; nullptr when unknown.
const SignatureScheme* find_scheme(std::string_view id);

KeyPair keygen(Rng& rng);
Signature sign(const KeyPair& key, BytesView message);
bool verify(const PublicKey& key, BytesView message, const Signature& sig);

}  // namespace tcsim
