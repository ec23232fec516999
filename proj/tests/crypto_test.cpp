#include <gtest/gtest.h>

#include <set>

#include "oracle/sha1_oracle.hpp"
#include "tcsim/crypto.hpp"

namespace tcsim {
namespace {

TEST(Hash160, EmptyInputIsStandardDigest) {
  EXPECT_EQ(hash160(Bytes{}).hex(), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
}

TEST(Hash160, AbcMatchesFrozenOracleValue) {
  // Frozen from tests/oracle/sha1_oracle.hpp, cross-checked with Python hashlib.
  EXPECT_EQ(hash160("abc").hex(), "a9993e364706816aba3e25717850c26c9cd0d89d");
}

TEST(Hash160, Deterministic) {
  EXPECT_EQ(hash160("payload"), hash160("payload"));
}

TEST(Hash160, AgreesWithOracleOnHundredVectors) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    Bytes data = rng.bytes(rng.uniform(300));
    auto ours = hash160(data);
    auto ref = oracle::sha1(data);
    ASSERT_EQ(ours.hex(), oracle::hex(ref)) << "vector " << i << " length " << data.size();
    ASSERT_EQ(ours.bytes().size(), 20u);
  }
}

TEST(Digest160, RejectsWrongLength) {
  EXPECT_THROW(Digest160::from_bytes(Bytes(19)), std::invalid_argument);
  EXPECT_THROW(Digest160::from_bytes(Bytes(21)), std::invalid_argument);
  EXPECT_TRUE(Digest160::from_bytes(Bytes(20)).is_zero());
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(Rng(42).fork("x").next_u64(), Rng(42).fork("x").next_u64());
  EXPECT_NE(Rng(42).fork("x").next_u64(), Rng(42).fork("y").next_u64());
}

TEST(Rng, UniformStaysInBounds) {
  Rng r(3);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(r.uniform(7), 7u);
  EXPECT_THROW(r.uniform(0), std::invalid_argument);
}

TEST(Signature, RoundTripAndRejections) {
  Rng rng(1);
  auto k1 = keygen(rng);
  auto k2 = keygen(rng);
  EXPECT_NE(k1.public_key(), k2.public_key());

  auto m = to_bytes("message");
  auto sig = sign(k1, m);
  EXPECT_TRUE(verify(k1.public_key(), m, sig));
  EXPECT_FALSE(verify(k1.public_key(), to_bytes("messagf"), sig));
  EXPECT_FALSE(verify(k2.public_key(), m, sig));
}

TEST(Signature, MalformedInputsFailWithoutThrowing) {
  Rng rng(2);
  auto k = keygen(rng);
  auto m = to_bytes("m");
  EXPECT_FALSE(verify(k.public_key(), m, Signature{}));
  EXPECT_FALSE(verify(k.public_key(), m, Signature{Bytes(5, 1)}));
  PublicKey bogus{"ed25519", Bytes(3)};
  EXPECT_FALSE(verify(bogus, m, sign(k, m)));
  PublicKey unknown{"rsa-4096", k.public_key().bytes};
  EXPECT_FALSE(verify(unknown, m, sign(k, m)));
}

TEST(Signature, SeedDeterminesKeys) {
  Rng a(42), b(42);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(keygen(a).public_key(), keygen(b).public_key());
}

TEST(Signature, NoCrossVerificationWithinARun) {
  Rng rng(11);
  std::vector<KeyPair> keys;
  for (int i = 0; i < 12; ++i) keys.push_back(keygen(rng));
  auto m = to_bytes("x");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto sig = sign(keys[i], m);
    for (std::size_t j = 0; j < keys.size(); ++j) EXPECT_EQ(verify(keys[j].public_key(), m, sig), i == j);
  }
}

TEST(Encoder, DistinctSequencesDoNotCollide) {
  auto a = Encoder("t").put("ab").put("c").bytes();
  auto b = Encoder("t").put("a").put("bc").bytes();
  EXPECT_NE(a, b);
}

TEST(Hex, RoundTripAndErrors) {
  Bytes b{0x00, 0xff, 0x10};
  EXPECT_EQ(to_hex(b), "00ff10");
  EXPECT_EQ(from_hex("00FF10"), b);
  EXPECT_THROW(from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

}  // namespace
}  // namespace tcsim
