#pragma once

#include <functional>
#include <memory>

#include <gtest/gtest.h>

#include "tcsim/attestation.hpp"
#include "tcsim/error.hpp"
#include "tcsim/measured_boot.hpp"
#include "tcsim/privacy_ca.hpp"
#include "tcsim/trust_anchor.hpp"

namespace tcsim::testing {

inline Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected tcsim::Error";
  return Errc::config_error;
}

inline std::vector<BootComponent> default_chain() {
  return make_chain({{"crtm", "crtm-v1"}, {"bios", "bios-v1"}, {"os", "os-v1"}, {"app", "app-v1"}});
}

// One manufacturer, one PCA, one enrolled device with a booted chain.
struct World {
  explicit World(std::uint64_t seed = 42, std::size_t batch = kDefaultBatchSize)
      : rng(seed), maker("acme", rng), pca("services", keygen(rng), {maker.root()}), challenger(rng.fork("challenger")) {
    device = std::make_unique<TrustAnchor>(maker.manufacture("phone", rng));
    chain = default_chain();
    log = boot(*device, chain);
    refs = ReferenceDb::from_chain(chain);
    enroll(*device, wallet, batch);
  }

  void enroll(TrustAnchor& anchor, CredentialWallet& w, std::size_t batch) {
    auto records = anchor.create_aik_batch(batch, rng);
    std::vector<PublicKey> pubs;
    for (const auto& r : records) pubs.push_back(r.public_key);
    auto challenge = pca.issue_ek_challenge(rng);
    auto certs = pca.enroll(anchor.ek_certificate(), pubs, challenge, anchor.ek_challenge_response(challenge), now);
    w.add_batch(records, certs);
  }

  AttestationChallenge challenge(Tick window = 10) { return challenger.issue({kBootPcr}, now, window); }

  AttestationResponse respond(const AttestationChallenge& c) {
    auto cred = wallet.take_for_service();
    EXPECT_TRUE(cred.has_value());
    return AttestationResponse{device->quote(cred->handle, c.pcr_selection, c.nonce), log, cred->certificate};
  }

  void reboot(const std::vector<BootComponent>& new_chain) {
    device->reset();
    log = boot(*device, new_chain);
  }

  Rng rng;
  Manufacturer maker;
  PrivacyCa pca;
  Challenger challenger;
  std::unique_ptr<TrustAnchor> device;
  std::vector<BootComponent> chain;
  MeasurementLog log;
  ReferenceDb refs;
  CredentialWallet wallet;
  Tick now = 0;
};

}  // namespace tcsim::testing
