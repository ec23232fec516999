#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcsim/attestation.hpp"
#include "tcsim/certificate.hpp"
#include "tcsim/trust_anchor.hpp"

namespace tcsim {

inline constexpr std::size_t kDefaultBatchSize = 10;
inline constexpr Tick kDefaultValidityTicks = 1000;

// New AIK public keys, authenticated by a signature of the last unused AIK of
// the previous batch.
struct ReplenishRequest {
  AikCertificate old_certificate;
  std::vector<PublicKey> new_aiks;
  Signature signature;
};

Bytes replenish_tbs(const AikCertificate& old_certificate, std::span<const PublicKey> new_aiks);

// Certifies AIKs of genuine anchors and doubles as the identity provider for a
// collaboration of services (the domain).
class PrivacyCa {
 public:
  PrivacyCa(std::string domain_id, KeyPair key, std::vector<PublicKey> trusted_manufacturers,
            Tick validity = kDefaultValidityTicks);

  const std::string& domain() const { return domain_; }
  const PublicKey& root() const { return key_.public_key(); }
  Tick validity() const { return validity_; }

  Bytes issue_ek_challenge(Rng& rng);

  // Throws untrusted-ek or ek-liveness-failed. The challenge is consumed.
  std::vector<AikCertificate> enroll(const EkCertificate& ek_certificate, std::span<const PublicKey> aik_publics,
                                     BytesView challenge, const Signature& response, Tick now);

  // Throws replenish-replay when the authenticating AIK was already consumed,
  // replenish-rejected for any other failure.
  std::vector<AikCertificate> replenish(const ReplenishRequest& request, Tick now);

  std::size_t issued_count() const { return issued_; }

 private:
  AikCertificate certify(const PublicKey& aik, Tick now);

  std::string domain_;
  KeyPair key_;
  std::vector<PublicKey> trusted_manufacturers_;
  Tick validity_;
  std::set<Bytes> pending_challenges_;
  std::set<std::string> consumed_;  // AIKs spent on replenishment
  std::size_t issued_ = 0;
};

// Device-side batch bookkeeping. The last unused credential of a batch is
// reserved for authenticating the next replenishment.
class CredentialWallet {
 public:
  struct Credential {
    AikHandle handle = 0;
    AikCertificate certificate;
    bool used = false;
  };

  void add_batch(std::span<const AikRecord> records, std::span<const AikCertificate> certificates);

  std::size_t count_unused() const;
  std::size_t size() const { return credentials_.size(); }
  bool needs_replenishment() const { return count_unused() == 1; }

  // Next credential for a service use; nullopt when only the reserved one is left.
  std::optional<Credential> take_for_service();
  // What take_for_service would return, without consuming it.
  std::optional<Credential> peek_for_service() const;
  // The reserved last credential; nullopt unless exactly one is unused.
  std::optional<Credential> take_for_replenishment();

 private:
  std::vector<Credential> credentials_;
};

struct PreparedReplenishment {
  ReplenishRequest request;
  std::vector<AikRecord> new_records;
};

// Creates the next batch inside the anchor and signs it with the reserved AIK.
PreparedReplenishment prepare_replenishment(TrustAnchor& anchor, CredentialWallet& wallet, std::size_t batch_size,
                                            Rng& rng);

// A service in the PCA's collaboration. Services may share a used-AIK set.
class Service {
 public:
  Service(std::string id, PublicKey pca_root, std::string domain, ReferenceDb refs,
          std::shared_ptr<UsedAikSet> used = std::make_shared<UsedAikSet>());

  const std::string& id() const { return id_; }
  const PublicKey& pca_root() const { return pca_root_; }
  const std::string& domain() const { return domain_; }
  const ReferenceDb& refs() const { return refs_; }
  UsedAikSet& used() { return *used_; }
  const std::shared_ptr<UsedAikSet>& used_set() const { return used_; }

 private:
  std::string id_;
  PublicKey pca_root_;
  std::string domain_;
  ReferenceDb refs_;
  std::shared_ptr<UsedAikSet> used_;
};

AttestationVerdict authenticate_for_service(Service& service, const AttestationResponse& response,
                                            const AttestationChallenge& challenge, Tick now);

}  // namespace tcsim
