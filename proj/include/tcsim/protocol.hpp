#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcsim/attestation.hpp"
#include "tcsim/measured_boot.hpp"
#include "tcsim/privacy_ca.hpp"
#include "tcsim/sim.hpp"
#include "tcsim/trust_anchor.hpp"

namespace tcsim {

inline constexpr const char* kMobileChannel = "mobile";
inline constexpr const char* kShortRangeChannel = "short-range";

// Attacks aimed at the first attestation exchange of a run.
enum class GenericAttack { forge_log, tamper, replay_aik, wrong_nonce, expired_cert };

std::string_view to_string(GenericAttack a);
std::optional<GenericAttack> generic_attack_from_string(std::string_view s);
Reason expected_reason(GenericAttack a);
inline constexpr GenericAttack kAllGenericAttacks[] = {GenericAttack::forge_log, GenericAttack::tamper,
                                                       GenericAttack::replay_aik, GenericAttack::wrong_nonce,
                                                       GenericAttack::expired_cert};

// Thrown once a generic attack has been observed and handled; the run stops.
struct Halted {
  std::string reason;
};

// A device-side composite: anchor, boot chain and credential wallets.
struct Platform {
  std::string id;
  std::string chain_name;
  std::unique_ptr<TrustAnchor> anchor;
  std::vector<BootComponent> chain;
  MeasurementLog log;
  std::map<std::string, CredentialWallet> wallets;  // keyed by PCA party

  void boot_chain(std::vector<BootComponent> c);
};

struct PcaParty {
  std::string id;
  std::unique_ptr<PrivacyCa> ca;
};

struct VerifierState {
  UsedAikSet used;
  std::unique_ptr<Challenger> challenger;
};

struct WorldOptions {
  std::size_t batch_size = kDefaultBatchSize;
  Tick validity = kDefaultValidityTicks;
  Tick freshness_window = 10;
  // Verifiers trusting the same PCA domain reject each other's used AIKs.
  bool shared_used_set = true;
};

// All party state of one run plus the delivery loop.
class World {
 public:
  World(std::uint64_t seed, WorldOptions options);

  sim::Network net;
  Rng rng;
  WorldOptions options;

  std::optional<GenericAttack> generic_attack;
  bool generic_fired = false;

  const Manufacturer& manufacturer() const { return *maker_; }
  void add_party(const std::string& id, const std::string& role);
  void add_channels(const std::string& carrier);

  void register_chain(const std::string& name, std::vector<BootComponent> chain);
  const std::vector<BootComponent>& chain(const std::string& name) const;
  const ReferenceDb& refs(const std::string& chain_name) const;

  Platform& add_platform(const std::string& id, const std::string& chain_name);
  Platform& platform(const std::string& id);
  bool is_platform(const std::string& id) const { return platforms_.count(id) != 0; }

  PcaParty& add_pca(const std::string& id, const std::string& domain);
  PrivacyCa& pca(const std::string& id);
  bool is_pca(const std::string& id) const { return pcas_.count(id) != 0; }

  VerifierState& verifier(const std::string& id);
  // The used-AIK set a verifier consults for credentials of one PCA domain.
  UsedAikSet& used_aiks(const std::string& verifier_id, const std::string& domain);
  KeyPair& party_key(const std::string& id);

  // Expected value of the boot register after an honest boot of the chain.
  Digest160 reference_pcr(const std::string& chain_name) const;

 private:
  std::unique_ptr<Manufacturer> maker_;
  std::map<std::string, std::vector<BootComponent>> chains_;
  std::map<std::string, ReferenceDb> refs_;
  std::map<std::string, Platform> platforms_;
  std::map<std::string, PcaParty> pcas_;
  std::map<std::string, VerifierState> verifiers_;
  std::map<std::string, UsedAikSet> domain_used_;
  std::map<std::string, KeyPair> keys_;
};

sim::Field field(std::string name, sim::Label label, std::string value, std::vector<std::string> readers = {});

// Sends over the named channel; returns the message as delivered.
std::optional<sim::Message> send(World& w, const std::string& from, const std::string& to, const std::string& channel,
                                 const std::string& kind, std::vector<sim::Field> fields, bool encrypted);

// EK-based enrollment of a fresh batch. Returns false when the PCA refuses.
bool enroll(World& w, Platform& p, const std::string& pca_id, std::size_t batch_size);

// Runs the replenishment round trip when the wallet is down to its reserved
// credential. Returns true if a new batch arrived.
bool replenish_if_needed(World& w, Platform& p, const std::string& pca_id);

struct AttestationRequest {
  std::string verifier;
  std::string pca;  // issuer of the prover's credential
  // PCA whose root the verifier trusts; defaults to pca.
  std::string trusted_pca;
  std::string channel = kShortRangeChannel;
  std::vector<PcrIndex> selection{kBootPcr};
  std::string purpose;
  // Extra response fields, computed from the nonce the prover received.
  std::function<std::vector<sim::Field>(const Bytes& nonce)> extra;
  bool encrypted = false;
};

struct AttestationOutcome {
  AttestationVerdict verdict;
  std::optional<AikCertificate> certificate;
  std::optional<sim::Message> response;  // as received by the verifier
};

// Challenge, quote, verify. Injects the run's generic attack into the first
// exchange and throws Halted after the verifier has reacted to it.
AttestationOutcome attest(World& w, Platform& prover, const AttestationRequest& req);

}  // namespace tcsim
