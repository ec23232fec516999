#include <gtest/gtest.h>

#include <set>

#include "oracle/sha1_oracle.hpp"
#include "tcsim/attestation.hpp"
#include "tcsim/error.hpp"
#include "tcsim/measured_boot.hpp"
#include "tcsim/trust_anchor.hpp"

namespace tcsim {
namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected tcsim::Error";
  return Errc::config_error;
}

class AnchorTest : public ::testing::Test {
 protected:
  Rng rng{42};
  Manufacturer maker{"acme", rng};
  TrustAnchor anchor = maker.manufacture("phone-1", rng);
};

TEST_F(AnchorTest, RegistersStartZero) {
  for (PcrIndex i = 0; i < kPcrCount; ++i) EXPECT_TRUE(anchor.read_pcr(i).is_zero());
}

TEST_F(AnchorTest, ExtendMatchesOracle) {
  auto d = hash160("abc");
  anchor.extend(0, d);
  // SHA-1(0^20 || SHA-1("abc")) computed with the test oracle.
  EXPECT_EQ(anchor.read_pcr(0).hex(), "ccd5bd41458de644ac34a2478b58ff819bef5acf");
  for (PcrIndex i = 1; i < kPcrCount; ++i) EXPECT_TRUE(anchor.read_pcr(i).is_zero());
}

TEST_F(AnchorTest, ExtendOutOfRangeRejected) {
  EXPECT_EQ(code_of([&] { anchor.extend(24, Digest160{}); }), Errc::pcr_index_out_of_range);
  EXPECT_EQ(code_of([&] { (void)anchor.read_pcr(100); }), Errc::pcr_index_out_of_range);
}

TEST_F(AnchorTest, ExtendSequenceEqualsLogFold) {
  Rng r(5);
  MeasurementLog log;
  for (int i = 0; i < 6; ++i) {
    auto m = hash160(r.bytes(10));
    anchor.extend(3, m);
    log.entries.push_back({"c" + std::to_string(i), m, 3});
  }
  EXPECT_EQ(recompute_pcr(log, 3), anchor.read_pcr(3));
  EXPECT_EQ(recompute_pcr(log), anchor.read_pcr(3));
}

TEST_F(AnchorTest, AikBatchFreshAndDistinct) {
  auto batch = anchor.create_aik_batch(10, rng);
  ASSERT_EQ(batch.size(), 10u);
  std::set<PublicKey> keys;
  for (const auto& r : batch) {
    keys.insert(r.public_key);
    EXPECT_EQ(r.usage, AikUsage::unused);
    EXPECT_EQ(r.batch, batch.front().batch);
  }
  EXPECT_EQ(keys.size(), 10u);
  auto next = anchor.create_aik_batch(2, rng);
  EXPECT_NE(next.front().batch, batch.front().batch);
}

TEST_F(AnchorTest, AikBatchTooSmall) {
  EXPECT_EQ(code_of([&] { anchor.create_aik_batch(1, rng); }), Errc::batch_too_small);
  EXPECT_EQ(code_of([&] { anchor.create_aik_batch(0, rng); }), Errc::batch_too_small);
}

TEST(AnchorDeterminism, SameSeedSameAiks) {
  auto run = [] {
    Rng rng(42);
    Manufacturer m("acme", rng);
    auto a = m.manufacture("x", rng);
    std::vector<PublicKey> out;
    for (const auto& r : a.create_aik_batch(4, rng)) out.push_back(r.public_key);
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST_F(AnchorTest, QuoteIsOneTime) {
  auto batch = anchor.create_aik_batch(2, rng);
  Bytes nonce(16, 7);
  std::vector<PcrIndex> sel{0};
  auto q = anchor.quote(batch[0].handle, sel, nonce);
  EXPECT_TRUE(verify_quote_signature(q, batch[0].public_key));
  EXPECT_TRUE(anchor.aik_used(batch[0].handle));
  EXPECT_EQ(code_of([&] { anchor.quote(batch[0].handle, sel, nonce); }), Errc::aik_already_used);
  EXPECT_EQ(code_of([&] { anchor.quote(999, sel, nonce); }), Errc::aik_unknown);
}

TEST_F(AnchorTest, QuoteOverEmptySelectionBindsNonce) {
  auto batch = anchor.create_aik_batch(2, rng);
  Bytes nonce(16, 1);
  auto q = anchor.quote(batch[0].handle, {}, nonce);
  EXPECT_TRUE(q.pcr_values.empty());
  EXPECT_TRUE(verify_quote_signature(q, batch[0].public_key));
  q.nonce[0] ^= 1;
  EXPECT_FALSE(verify_quote_signature(q, batch[0].public_key));
}

TEST_F(AnchorTest, AlteringAnyQuoteFieldBreaksSignature) {
  anchor.extend(0, hash160("os"));
  auto batch = anchor.create_aik_batch(2, rng);
  std::vector<PcrIndex> sel{0, 1};
  const auto q = anchor.quote(batch[0].handle, sel, Bytes(16, 9));
  ASSERT_TRUE(verify_quote_signature(q, batch[0].public_key));

  auto a = q;
  a.pcr_selection[1] = 2;
  EXPECT_FALSE(verify_quote_signature(a, batch[0].public_key));
  auto b = q;
  b.pcr_values[0] = Digest160{};
  EXPECT_FALSE(verify_quote_signature(b, batch[0].public_key));
  auto c = q;
  c.nonce.push_back(0);
  EXPECT_FALSE(verify_quote_signature(c, batch[0].public_key));
  auto d = q;
  d.signature.bytes[3] ^= 0x40;
  EXPECT_FALSE(verify_quote_signature(d, batch[0].public_key));
  EXPECT_FALSE(verify_quote_signature(q, batch[1].public_key));
}

TEST_F(AnchorTest, EkChallengeResponse) {
  Bytes c(16, 3), c2(16, 4);
  auto sig = anchor.ek_challenge_response(c);
  const auto& ek = anchor.ek_certificate().ek_public;
  EXPECT_TRUE(verify(ek, ek_liveness_tbs(c), sig));
  EXPECT_FALSE(verify(ek, ek_liveness_tbs(c2), sig));
  EXPECT_TRUE(verify_ek_certificate(anchor.ek_certificate(), maker.root()));

  auto other = maker.manufacture("phone-2", rng);
  EXPECT_FALSE(verify(other.ek_certificate().ek_public, ek_liveness_tbs(c), sig));
  EXPECT_FALSE(verify(ek, ek_liveness_tbs(c), other.ek_challenge_response(c)));
}

class SlotTest : public AnchorTest {
 protected:
  void SetUp() override {
    authority_ = std::make_unique<KeyPair>(keygen(rng));
    anchor.extend(0, hash160("ppc"));
    std::vector<PcrIndex> regs{0};
    anchor.create_counter_slot("balance", 500, AccessPolicy::from_current(anchor.pcrs(), regs),
                               authority_->public_key());
  }
  std::unique_ptr<KeyPair> authority_;
};

TEST_F(SlotTest, DecrementArithmetic) {
  EXPECT_EQ(anchor.slot_read("balance"), 500u);
  EXPECT_EQ(anchor.slot_decrement("balance", 50), 450u);
  EXPECT_EQ(anchor.slot_read("balance"), 450u);
}

TEST_F(SlotTest, FloorAtZero) {
  EXPECT_EQ(anchor.slot_decrement("balance", 500), 0u);
  EXPECT_EQ(code_of([&] { anchor.slot_decrement("balance", 1); }), Errc::insufficient_balance);
  EXPECT_EQ(anchor.slot_read("balance"), 0u);
}

TEST_F(SlotTest, SealedAgainstChangedState) {
  anchor.reset();
  anchor.extend(0, hash160("ppc-modified"));
  EXPECT_EQ(code_of([&] { anchor.slot_read("balance"); }), Errc::sealed_against_state);
  EXPECT_EQ(code_of([&] { anchor.slot_decrement("balance", 1); }), Errc::sealed_against_state);
  // Restoring the measured state restores access.
  anchor.reset();
  anchor.extend(0, hash160("ppc"));
  EXPECT_EQ(anchor.slot_read("balance"), 500u);
}

TEST_F(SlotTest, VoucherRedemption) {
  auto v = issue_voucher(*authority_, "v-1", 100);
  EXPECT_EQ(anchor.slot_redeem("balance", v), 600u);
  EXPECT_EQ(code_of([&] { anchor.slot_redeem("balance", v); }), Errc::voucher_replay);

  auto forged = v;
  forged.id = "v-2";
  EXPECT_EQ(code_of([&] { anchor.slot_redeem("balance", forged); }), Errc::bad_voucher);
  auto rogue = keygen(rng);
  EXPECT_EQ(code_of([&] { anchor.slot_redeem("balance", issue_voucher(rogue, "v-3", 5)); }), Errc::bad_voucher);
  EXPECT_EQ(anchor.slot_read("balance"), 600u);
}

TEST_F(SlotTest, CounterConservationOverRandomOps) {
  Rng r(99);
  std::uint64_t expected = 500, decremented = 0, credited = 0;
  for (int i = 0; i < 200; ++i) {
    if (r.uniform(4) == 0) {
      auto v = issue_voucher(*authority_, "v" + std::to_string(i), r.uniform(100));
      anchor.slot_redeem("balance", v);
      credited += v.value;
      expected += v.value;
    } else {
      auto amount = r.uniform(80);
      try {
        anchor.slot_decrement("balance", amount);
        decremented += amount;
        expected -= amount;
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), Errc::insufficient_balance);
        ASSERT_GT(amount, expected);
      }
    }
    ASSERT_EQ(anchor.slot_read("balance"), expected);
  }
  EXPECT_EQ(500 + credited - decremented, anchor.slot_read("balance"));
}

TEST_F(SlotTest, SealedKeyFollowsState) {
  auto key = keygen(rng);
  auto pub = key.public_key();
  std::vector<PcrIndex> regs{0};
  anchor.seal_key("ppc-key", std::move(key), AccessPolicy::from_current(anchor.pcrs(), regs));
  auto m = to_bytes("balance>=50");
  EXPECT_TRUE(verify(pub, m, anchor.sealed_sign("ppc-key", m)));
  anchor.reset();
  EXPECT_EQ(code_of([&] { anchor.sealed_sign("ppc-key", m); }), Errc::sealed_against_state);
  EXPECT_EQ(code_of([&] { anchor.sealed_sign("nope", m); }), Errc::slot_unknown);
}

}  // namespace
}  // namespace tcsim
