#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace tcsim {
namespace {

using testing::World;

std::vector<Reason> only(Reason r) { return {r}; }

TEST(RecomputePcr, EmptyLogIsZero) { EXPECT_TRUE(recompute_pcr(MeasurementLog{}).is_zero()); }

TEST(VerifyAttestation, HonestDeviceAccepted) {
  World w;
  UsedAikSet used;
  auto c = w.challenge();
  auto v = verify_attestation(w.respond(c), c, w.pca.root(), w.refs, used, w.now);
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.reasons, only(Reason::ok));
  EXPECT_EQ(used.size(), 1u);
}

TEST(VerifyAttestation, ReplayedResponseIsAikReused) {
  World w;
  UsedAikSet used;
  auto c = w.challenge();
  auto r = w.respond(c);
  ASSERT_TRUE(verify_attestation(r, c, w.pca.root(), w.refs, used, w.now).accepted);
  auto v = verify_attestation(r, c, w.pca.root(), w.refs, used, w.now);
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.reasons, only(Reason::aik_reused));
}

TEST(VerifyAttestation, TamperedComponentIsReferenceMismatch) {
  World w;
  w.reboot(tamper(w.chain, "app", to_bytes("app-evil")));
  UsedAikSet used;
  auto c = w.challenge();
  auto v = verify_attestation(w.respond(c), c, w.pca.root(), w.refs, used, w.now);
  EXPECT_EQ(v.reasons, only(Reason::reference_mismatch));
}

TEST(VerifyAttestation, ForgedLogIsLogPcrMismatch) {
  World w;
  // Tampered component, log rewritten to show the reference value.
  w.reboot(tamper(w.chain, "app", to_bytes("app-evil")));
  w.log = forge_log(w.log, 3, *w.refs.find("app"));
  UsedAikSet used;
  auto c = w.challenge();
  auto v = verify_attestation(w.respond(c), c, w.pca.root(), w.refs, used, w.now);
  EXPECT_EQ(v.reasons, only(Reason::log_pcr_mismatch));
}

TEST(VerifyAttestation, ForgeryCaughtAtAnyPosition) {
  for (std::size_t pos : {0u, 2u, 3u}) {
    World w;
    w.log = forge_log(w.log, pos, hash160("fake"));
    UsedAikSet used;
    auto c = w.challenge();
    auto v = verify_attestation(w.respond(c), c, w.pca.root(), w.refs, used, w.now);
    EXPECT_TRUE(v.has(Reason::log_pcr_mismatch)) << pos;
    EXPECT_FALSE(v.accepted);
  }
}

TEST(VerifyAttestation, WrongNonceIsStale) {
  World w;
  UsedAikSet used;
  auto c = w.challenge();
  auto other = w.challenge();
  auto v = verify_attestation(w.respond(other), c, w.pca.root(), w.refs, used, w.now);
  EXPECT_EQ(v.reasons, only(Reason::stale_nonce));
}

TEST(VerifyAttestation, PastDeadlineIsStale) {
  World w;
  UsedAikSet used;
  auto c = w.challenge(5);
  auto r = w.respond(c);
  auto v = verify_attestation(r, c, w.pca.root(), w.refs, used, w.now + 6);
  EXPECT_EQ(v.reasons, only(Reason::stale_nonce));
}

TEST(VerifyAttestation, ExpiredCertificate) {
  World w;
  UsedAikSet used;
  w.now = kDefaultValidityTicks + 1;
  auto c = w.challenge();
  auto v = verify_attestation(w.respond(c), c, w.pca.root(), w.refs, used, w.now);
  EXPECT_EQ(v.reasons, only(Reason::cert_expired));
}

TEST(VerifyAttestation, UntrustedPcaIsBadCertChain) {
  World w;
  Rng r(9);
  auto rogue = keygen(r);
  UsedAikSet used;
  auto c = w.challenge();
  auto v = verify_attestation(w.respond(c), c, rogue.public_key(), w.refs, used, w.now);
  EXPECT_EQ(v.reasons, only(Reason::bad_cert_chain));

  UsedAikSet used2;
  auto c2 = w.challenge();
  auto v2 = verify_attestation(w.respond(c2), c2, w.pca.root(), w.refs, used2, w.now, "other-domain");
  EXPECT_EQ(v2.reasons, only(Reason::bad_cert_chain));
}

TEST(VerifyAttestation, SubstitutedAikIsBadQuoteSignature) {
  World w;
  UsedAikSet used;
  auto c = w.challenge();
  auto r1 = w.respond(c);
  auto r2 = w.respond(c);
  r1.certificate = r2.certificate;  // quote signed by a different AIK
  auto v = verify_attestation(r1, c, w.pca.root(), w.refs, used, w.now);
  EXPECT_EQ(v.reasons, only(Reason::bad_quote_signature));
}

TEST(VerifyAttestation, AllFailuresReportedInFixedOrder) {
  World w;
  w.reboot(tamper(w.chain, "os", to_bytes("x")));
  UsedAikSet used;
  auto c = w.challenge();
  auto other = w.challenge();
  auto r = w.respond(other);
  r.log = forge_log(r.log, 0, hash160("junk"));
  used.insert(r.certificate.aik_public.fingerprint());
  auto v = verify_attestation(r, c, w.pca.root(), w.refs, used, kDefaultValidityTicks + 100);
  std::vector<Reason> expected{Reason::cert_expired, Reason::aik_reused, Reason::stale_nonce,
                               Reason::log_pcr_mismatch, Reason::reference_mismatch};
  EXPECT_EQ(v.reasons, expected);
  EXPECT_EQ(v.reasons_string(), "cert-expired,aik-reused,stale-nonce,log-pcr-mismatch,reference-mismatch");
}

TEST(VerifyAttestation, VerdictIsDeterministic) {
  World w;
  auto c = w.challenge();
  auto r = w.respond(c);
  UsedAikSet a, b;
  auto v1 = verify_attestation(r, c, w.pca.root(), w.refs, a, w.now);
  auto v2 = verify_attestation(r, c, w.pca.root(), w.refs, b, w.now);
  EXPECT_EQ(v1.reasons, v2.reasons);
  EXPECT_EQ(v1.accepted, v2.accepted);
}

TEST(VerifyAttestation, AcceptedIffOnlyOk) {
  // Property over random combinations of injected faults.
  Rng r(5);
  for (int i = 0; i < 40; ++i) {
    World w(100 + i, 4);
    UsedAikSet used;
    auto c = w.challenge();
    bool fault = false;
    auto resp = [&] {
      if (r.uniform(3) == 0) {
        fault = true;
        return w.respond(w.challenge());
      }
      return w.respond(c);
    }();
    if (r.uniform(3) == 0) {
      fault = true;
      resp.log = forge_log(resp.log, r.uniform(resp.log.entries.size()), hash160("f"));
    }
    auto v = verify_attestation(resp, c, w.pca.root(), w.refs, used, w.now);
    EXPECT_EQ(v.accepted, v.reasons == only(Reason::ok));
    EXPECT_EQ(v.accepted, !fault);
  }
}

TEST(Challenger, NoncesUniqueAndLongEnough) {
  Challenger ch(Rng(1));
  std::set<Bytes> seen;
  for (int i = 0; i < 200; ++i) {
    auto c = ch.issue({0}, 5, 10);
    EXPECT_GE(c.nonce.size(), kMinNonceSize);
    EXPECT_EQ(c.freshness_deadline, 15u);
    EXPECT_TRUE(seen.insert(c.nonce).second);
  }
}

TEST(ReasonNames, RoundTrip) {
  for (auto r : {Reason::ok, Reason::bad_cert_chain, Reason::cert_expired, Reason::aik_reused,
                 Reason::bad_quote_signature, Reason::stale_nonce, Reason::log_pcr_mismatch,
                 Reason::reference_mismatch}) {
    EXPECT_EQ(reason_from_string(to_string(r)), r);
  }
  EXPECT_FALSE(reason_from_string("bogus").has_value());
}

}  // namespace
}  // namespace tcsim
