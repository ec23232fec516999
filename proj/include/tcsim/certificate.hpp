#pragma once

#include <cstdint>
#include <string>

#include "tcsim/crypto.hpp"

namespace tcsim {

using Tick = std::uint64_t;

// Privacy-CA statement "this AIK belongs to a valid TPM admitted to domain_id".
// Deliberately carries nothing derived from the endorsement key or a device
// serial number.
struct AikCertificate {
  PublicKey aik_public;
  std::string domain_id;
  Tick valid_from = 0;
  Tick valid_until = 0;
  std::string hash_id = "sha256";
  Signature pca_signature;

  bool operator==(const AikCertificate&) const = default;
};

// Digest of the to-be-signed fields under hash_id; what the PCA signs.
Bytes aik_certificate_tbs(const AikCertificate& cert);
bool verify_aik_certificate(const AikCertificate& cert, const PublicKey& pca_root);
inline bool certificate_valid_at(const AikCertificate& cert, Tick now) {
  return cert.valid_from <= now && now < cert.valid_until;
}

}  // namespace tcsim
