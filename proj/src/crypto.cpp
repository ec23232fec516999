#include "tcsim/crypto.hpp"

#include <openssl/evp.h>
#include <sodium.h>

#include <stdexcept>

namespace tcsim {

Digest160 Digest160::from_bytes(BytesView raw) {
  if (raw.size() != kSize) throw std::invalid_argument("Digest160 requires exactly 20 bytes");
  std::array<std::uint8_t, kSize> a{};
  std::copy(raw.begin(), raw.end(), a.begin());
  return Digest160(a);
}

Digest160 Digest160::from_hex(std::string_view hex) { return from_bytes(tcsim::from_hex(hex)); }

bool Digest160::is_zero() const {
  for (auto b : bytes_)
    if (b != 0) return false;
  return true;
}

Digest160 hash160(BytesView data) {
  std::array<std::uint8_t, Digest160::kSize> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha1(), nullptr) != 1 ||
      len != Digest160::kSize) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  return Digest160(out);
}

Digest256 sha256(BytesView data) {
  Digest256 out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

std::string sha256_hex(BytesView data) {
  auto d = sha256(data);
  return to_hex(d);
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::uniform bound must be positive");
  // Rejection sampling keeps the result platform independent and unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out;
  out.reserve(n + 8);
  while (out.size() < n) {
    std::uint64_t v = engine_();
    for (int i = 0; i < 8 && out.size() < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  return out;
}

Rng Rng::fork(std::string_view label) const {
  auto digest = sha256(Encoder("rng-fork").put_u64(seed_).put(label).bytes());
  std::uint64_t child = 0;
  for (int i = 0; i < 8; ++i) child = (child << 8) | digest[i];
  return Rng(child);
}

std::string PublicKey::fingerprint() const {
  auto d = sha256(Encoder("pubkey").put(scheme_id).put(bytes).bytes());
  return to_hex(BytesView(d.data(), 16));
}

namespace {

class Ed25519Scheme final : public SignatureScheme {
 public:
  Ed25519Scheme() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  }

  std::string_view id() const override { return "ed25519"; }

  KeyPair keygen(Rng& rng) const override {
    Bytes seed = rng.bytes(crypto_sign_SEEDBYTES);
    Bytes pk(crypto_sign_PUBLICKEYBYTES);
    Bytes sk(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    return KeyPair(PublicKey{std::string(id()), std::move(pk)}, std::move(sk));
  }

  Signature sign(const KeyPair& key, BytesView message) const override {
    if (key.scheme_id() != id() || key.private_bytes().size() != crypto_sign_SECRETKEYBYTES)
      throw std::invalid_argument("key does not belong to ed25519");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), key.private_bytes().data());
    return Signature{std::move(sig)};
  }

  bool verify(const PublicKey& key, BytesView message, const Signature& sig) const override {
    if (key.scheme_id != id() || key.bytes.size() != crypto_sign_PUBLICKEYBYTES ||
        sig.bytes.size() != crypto_sign_BYTES) {
      return false;
    }
    return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(), key.bytes.data()) == 0;
  }
};

}  // namespace

const SignatureScheme& ed25519_scheme() {
  static const Ed25519Scheme scheme;
  return scheme;
}

const SignatureScheme* find_scheme(std::string_view id) {
  if (id == ed25519_scheme().id()) return &ed25519_scheme();
  return nullptr;
}

KeyPair keygen(Rng& rng) { return ed25519_scheme().keygen(rng); }

Signature sign(const KeyPair& key, BytesView message) {
  const auto* scheme = find_scheme(key.scheme_id());
  if (scheme == nullptr) throw std::invalid_argument("unknown signature scheme");
  return scheme->sign(key, message);
}

bool verify(const PublicKey& key, BytesView message, const Signature& sig) {
  const auto* scheme = find_scheme(key.scheme_id);
  return scheme != nullptr && scheme->verify(key, message, sig);
}

}  // namespace tcsim
