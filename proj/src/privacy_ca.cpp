#include "tcsim/privacy_ca.hpp"

#include <algorithm>

#include "tcsim/error.hpp"

namespace tcsim {

Bytes aik_certificate_tbs(const AikCertificate& cert) {
  Bytes body = Encoder("aik-certificate/1")
                   .put(cert.aik_public.scheme_id)
                   .put(cert.aik_public.bytes)
                   .put(cert.domain_id)
                   .put_u64(cert.valid_from)
                   .put_u64(cert.valid_until)
                   .put(cert.hash_id)
                   .bytes();
  auto digest = sha256(body);
  return Bytes(digest.begin(), digest.end());
}

bool verify_aik_certificate(const AikCertificate& cert, const PublicKey& pca_root) {
  if (cert.hash_id != "sha256") return false;
  return verify(pca_root, aik_certificate_tbs(cert), cert.pca_signature);
}

Bytes replenish_tbs(const AikCertificate& old_certificate, std::span<const PublicKey> new_aiks) {
  Encoder enc("aik-replenish/1");
  enc.put(aik_certificate_tbs(old_certificate));
  enc.put_u64(new_aiks.size());
  for (const auto& k : new_aiks) enc.put(k.scheme_id).put(k.bytes);
  return std::move(enc).bytes();
}

PrivacyCa::PrivacyCa(std::string domain_id, KeyPair key, std::vector<PublicKey> trusted_manufacturers, Tick validity)
    : domain_(std::move(domain_id)),
      key_(std::move(key)),
      trusted_manufacturers_(std::move(trusted_manufacturers)),
      validity_(validity) {}

Bytes PrivacyCa::issue_ek_challenge(Rng& rng) {
  Bytes c = rng.bytes(kMinNonceSize);
  pending_challenges_.insert(c);
  return c;
}

AikCertificate PrivacyCa::certify(const PublicKey& aik, Tick now) {
  AikCertificate cert{aik, domain_, now, now + validity_, "sha256", {}};
  cert.pca_signature = sign(key_, aik_certificate_tbs(cert));
  ++issued_;
  return cert;
}

std::vector<AikCertificate> PrivacyCa::enroll(const EkCertificate& ek_certificate,
                                              std::span<const PublicKey> aik_publics, BytesView challenge,
                                              const Signature& response, Tick now) {
  const bool trusted = std::any_of(trusted_manufacturers_.begin(), trusted_manufacturers_.end(),
                                   [&](const PublicKey& root) { return verify_ek_certificate(ek_certificate, root); });
  if (!trusted) throw Error(Errc::untrusted_ek);

  Bytes c(challenge.begin(), challenge.end());
  const bool pending = pending_challenges_.erase(c) == 1;
  if (!pending || !verify(ek_certificate.ek_public, ek_liveness_tbs(challenge), response))
    throw Error(Errc::ek_liveness_failed);

  std::vector<AikCertificate> out;
  for (const auto& aik : aik_publics) out.push_back(certify(aik, now));
  return out;
}

std::vector<AikCertificate> PrivacyCa::replenish(const ReplenishRequest& request, Tick now) {
  const auto& old = request.old_certificate;
  if (!verify_aik_certificate(old, root()) || old.domain_id != domain_ || !certificate_valid_at(old, now))
    throw Error(Errc::replenish_rejected, "old certificate not valid for this PCA");
  if (!verify(old.aik_public, replenish_tbs(old, request.new_aiks), request.signature))
    throw Error(Errc::replenish_rejected, "bad signature by last AIK");
  if (!consumed_.insert(old.aik_public.fingerprint()).second) throw Error(Errc::replenish_replay);

  std::vector<AikCertificate> out;
  for (const auto& aik : request.new_aiks) out.push_back(certify(aik, now));
  return out;
}

void CredentialWallet::add_batch(std::span<const AikRecord> records, std::span<const AikCertificate> certificates) {
  if (records.size() != certificates.size()) throw Error(Errc::invalid_structure, "records/certificates mismatch");
  std::erase_if(credentials_, [](const Credential& c) { return c.used; });
  for (std::size_t i = 0; i < records.size(); ++i)
    credentials_.push_back(Credential{records[i].handle, certificates[i], false});
}

std::size_t CredentialWallet::count_unused() const {
  return static_cast<std::size_t>(
      std::count_if(credentials_.begin(), credentials_.end(), [](const Credential& c) { return !c.used; }));
}

std::optional<CredentialWallet::Credential> CredentialWallet::take_for_service() {
  if (count_unused() < 2) return std::nullopt;
  for (auto& c : credentials_) {
    if (!c.used) {
      c.used = true;
      return c;
    }
  }
  return std::nullopt;
}

std::optional<CredentialWallet::Credential> CredentialWallet::peek_for_service() const {
  if (count_unused() < 2) return std::nullopt;
  for (const auto& c : credentials_)
    if (!c.used) return c;
  return std::nullopt;
}

std::optional<CredentialWallet::Credential> CredentialWallet::take_for_replenishment() {
  if (count_unused() != 1) return std::nullopt;
  for (auto& c : credentials_) {
    if (!c.used) {
      c.used = true;
      return c;
    }
  }
  return std::nullopt;
}

PreparedReplenishment prepare_replenishment(TrustAnchor& anchor, CredentialWallet& wallet, std::size_t batch_size,
                                            Rng& rng) {
  auto last = wallet.take_for_replenishment();
  if (!last) throw Error(Errc::replenish_rejected, "wallet is not down to its last credential");
  PreparedReplenishment out;
  out.new_records = anchor.create_aik_batch(batch_size, rng);
  for (const auto& r : out.new_records) out.request.new_aiks.push_back(r.public_key);
  out.request.old_certificate = last->certificate;
  out.request.signature = anchor.sign_replenishment(last->handle, replenish_tbs(last->certificate, out.request.new_aiks));
  return out;
}

Service::Service(std::string id, PublicKey pca_root, std::string domain, ReferenceDb refs,
                 std::shared_ptr<UsedAikSet> used)
    : id_(std::move(id)),
      pca_root_(std::move(pca_root)),
      domain_(std::move(domain)),
      refs_(std::move(refs)),
      used_(std::move(used)) {}

AttestationVerdict authenticate_for_service(Service& service, const AttestationResponse& response,
                                            const AttestationChallenge& challenge, Tick now) {
  return verify_attestation(response, challenge, service.pca_root(), service.refs(), service.used(), now,
                            service.domain());
}

}  // namespace tcsim
