#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace tcsim {
namespace {

using testing::code_of;
using testing::World;

TEST(Enroll, TenCertificatesWithoutEkBytes) {
  World w(42, 10);
  Rng rng(3);
  auto anchor = w.maker.manufacture("phone", rng);
  auto records = anchor.create_aik_batch(10, rng);
  std::vector<PublicKey> pubs;
  for (const auto& r : records) pubs.push_back(r.public_key);
  auto ch = w.pca.issue_ek_challenge(rng);
  auto certs = w.pca.enroll(anchor.ek_certificate(), pubs, ch, anchor.ek_challenge_response(ch), 7);
  ASSERT_EQ(certs.size(), 10u);
  const auto& ek = anchor.ek_certificate().ek_public.bytes;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    EXPECT_TRUE(verify_aik_certificate(certs[i], w.pca.root()));
    EXPECT_EQ(certs[i].aik_public, pubs[i]);
    EXPECT_EQ(certs[i].domain_id, "services");
    EXPECT_EQ(certs[i].valid_from, 7u);
    EXPECT_EQ(certs[i].valid_until, 7u + kDefaultValidityTicks);
    EXPECT_NE(certs[i].aik_public.bytes, ek);
    auto tbs = aik_certificate_tbs(certs[i]);
    EXPECT_EQ(std::search(tbs.begin(), tbs.end(), ek.begin(), ek.end()), tbs.end());
  }
}

TEST(Enroll, ForgedEkCertificateIsUntrusted) {
  World w;
  Rng rng(4);
  Manufacturer rogue("rogue", rng);
  auto anchor = rogue.manufacture("phone", rng);
  auto ch = w.pca.issue_ek_challenge(rng);
  EXPECT_EQ(code_of([&] {
              w.pca.enroll(anchor.ek_certificate(), {}, ch, anchor.ek_challenge_response(ch), 0);
            }),
            Errc::untrusted_ek);

  auto genuine = w.maker.manufacture("phone", rng);
  auto cert = genuine.ek_certificate();
  cert.model = "other-model";
  EXPECT_EQ(code_of([&] { w.pca.enroll(cert, {}, ch, genuine.ek_challenge_response(ch), 0); }), Errc::untrusted_ek);
}

TEST(Enroll, LivenessFailures) {
  World w;
  Rng rng(5);
  auto a = w.maker.manufacture("phone", rng);
  auto b = w.maker.manufacture("phone", rng);
  auto ch = w.pca.issue_ek_challenge(rng);
  // Response from a different anchor.
  EXPECT_EQ(code_of([&] { w.pca.enroll(a.ek_certificate(), {}, ch, b.ek_challenge_response(ch), 0); }),
            Errc::ek_liveness_failed);
  // Challenge was consumed by the failed attempt.
  EXPECT_EQ(code_of([&] { w.pca.enroll(a.ek_certificate(), {}, ch, a.ek_challenge_response(ch), 0); }),
            Errc::ek_liveness_failed);
  // Never-issued challenge.
  Bytes made_up(16, 1);
  EXPECT_EQ(code_of([&] { w.pca.enroll(a.ek_certificate(), {}, made_up, a.ek_challenge_response(made_up), 0); }),
            Errc::ek_liveness_failed);
}

TEST(Replenish, BatchOfThreeAfterTwoServiceUses) {
  World w(42, 3);
  ASSERT_TRUE(w.wallet.take_for_service());
  ASSERT_TRUE(w.wallet.take_for_service());
  EXPECT_FALSE(w.wallet.take_for_service());  // last one is reserved
  ASSERT_TRUE(w.wallet.needs_replenishment());

  auto prepared = prepare_replenishment(*w.device, w.wallet, 3, w.rng);
  auto certs = w.pca.replenish(prepared.request, w.now);
  ASSERT_EQ(certs.size(), 3u);
  w.wallet.add_batch(prepared.new_records, certs);
  EXPECT_EQ(w.wallet.count_unused(), 3u);
  EXPECT_EQ(w.wallet.size(), 3u);

  EXPECT_EQ(code_of([&] { w.pca.replenish(prepared.request, w.now); }), Errc::replenish_replay);
}

TEST(Replenish, NewCertificatesShareOnlyDomainAndIssuer) {
  World w(42, 3);
  w.wallet.take_for_service();
  auto old_cert = w.wallet.take_for_service()->certificate;
  auto prepared = prepare_replenishment(*w.device, w.wallet, 3, w.rng);
  w.now = 5;
  auto certs = w.pca.replenish(prepared.request, w.now);
  for (const auto& c : certs) {
    EXPECT_EQ(c.domain_id, old_cert.domain_id);
    EXPECT_TRUE(verify_aik_certificate(c, w.pca.root()));
    EXPECT_NE(c.aik_public, old_cert.aik_public);
    EXPECT_NE(c.valid_from, old_cert.valid_from);
    EXPECT_NE(c.valid_until, old_cert.valid_until);
    EXPECT_NE(c.pca_signature, old_cert.pca_signature);
  }
}

TEST(Replenish, RejectsTamperedOrForeignRequests) {
  World w(42, 2);
  w.wallet.take_for_service();
  auto prepared = prepare_replenishment(*w.device, w.wallet, 2, w.rng);
  auto extra = prepared.request;
  Rng r(8);
  extra.new_aiks.push_back(keygen(r).public_key());
  EXPECT_EQ(code_of([&] { w.pca.replenish(extra, w.now); }), Errc::replenish_rejected);

  PrivacyCa other("services", keygen(r), {w.maker.root()});
  EXPECT_EQ(code_of([&] { other.replenish(prepared.request, w.now); }), Errc::replenish_rejected);
  EXPECT_EQ(code_of([&] { w.pca.replenish(prepared.request, kDefaultValidityTicks + 1); }),
            Errc::replenish_rejected);
  EXPECT_NO_THROW(w.pca.replenish(prepared.request, w.now));
}

TEST(Replenish, AnchorRefusesSecondUseOfReservedAik) {
  World w(42, 2);
  w.wallet.take_for_service();
  prepare_replenishment(*w.device, w.wallet, 2, w.rng);
  EXPECT_EQ(code_of([&] { prepare_replenishment(*w.device, w.wallet, 2, w.rng); }), Errc::replenish_rejected);
}

TEST(BatchLiveness, ReplenishmentsFollowFloorFormula) {
  for (std::size_t n : {2u, 3u, 10u}) {
    for (std::size_t k : {1u, 8u, 9u, 10u, 27u, 40u}) {
      World w(7, n);
      std::size_t replenishments = 0;
      for (std::size_t i = 0; i < k; ++i) {
        ASSERT_TRUE(w.wallet.take_for_service().has_value());
        if (w.wallet.needs_replenishment()) {
          auto p = prepare_replenishment(*w.device, w.wallet, n, w.rng);
          w.wallet.add_batch(p.new_records, w.pca.replenish(p.request, w.now));
          ++replenishments;
        }
      }
      EXPECT_EQ(replenishments, k / (n - 1)) << "n=" << n << " k=" << k;
    }
  }
}

TEST(AuthenticateForService, FreshCertificateGranted) {
  World w;
  Service svc("shop", w.pca.root(), "services", w.refs);
  auto c = w.challenge();
  EXPECT_TRUE(authenticate_for_service(svc, w.respond(c), c, w.now).accepted);
}

TEST(AuthenticateForService, SharedVersusSeparateUsedSets) {
  World w;
  auto shared = std::make_shared<UsedAikSet>();
  Service a("a", w.pca.root(), "services", w.refs, shared);
  Service b("b", w.pca.root(), "services", w.refs, shared);
  Service c("c", w.pca.root(), "services", w.refs);

  auto ch = w.challenge();
  auto resp = w.respond(ch);
  EXPECT_TRUE(authenticate_for_service(a, resp, ch, w.now).accepted);
  auto vb = authenticate_for_service(b, resp, ch, w.now);
  EXPECT_FALSE(vb.accepted);
  EXPECT_TRUE(vb.has(Reason::aik_reused));
  EXPECT_TRUE(authenticate_for_service(c, resp, ch, w.now).accepted);
}

TEST(AuthenticateForService, ExpiredCertificate) {
  World w;
  Service svc("shop", w.pca.root(), "services", w.refs);
  w.now = 5000;
  auto c = w.challenge();
  auto v = authenticate_for_service(svc, w.respond(c), c, w.now);
  EXPECT_TRUE(v.has(Reason::cert_expired));
}

}  // namespace
}  // namespace tcsim
