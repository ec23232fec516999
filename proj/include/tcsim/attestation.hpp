#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tcsim/certificate.hpp"
#include "tcsim/measured_boot.hpp"
#include "tcsim/trust_anchor.hpp"

namespace tcsim {

inline constexpr std::size_t kMinNonceSize = 16;

struct AttestationChallenge {
  Bytes nonce;
  std::vector<PcrIndex> pcr_selection;
  Tick freshness_deadline = 0;
};

struct AttestationResponse {
  Quote quote;
  MeasurementLog log;
  AikCertificate certificate;
};

// Declaration order is the order in which checks are reported.
enum class Reason {
  ok,
  bad_cert_chain,
  cert_expired,
  aik_reused,
  bad_quote_signature,
  stale_nonce,
  log_pcr_mismatch,
  reference_mismatch,
};

std::string_view to_string(Reason r);
std::optional<Reason> reason_from_string(std::string_view s);

struct AttestationVerdict {
  bool accepted = false;
  std::vector<Reason> reasons;

  bool has(Reason r) const;
  std::string reasons_string() const;  // comma separated
};

// Verifier-side record of consumed AIKs, keyed by public-key fingerprint.
using UsedAikSet = std::set<std::string>;

// Left fold of extend over every log entry, starting from 20 zero bytes.
Digest160 recompute_pcr(const MeasurementLog& log);
// Same fold restricted to entries recorded for one register.
Digest160 recompute_pcr(const MeasurementLog& log, PcrIndex pcr);

// Runs every check (no short circuit) and reports failures in Reason order.
// The certified AIK is added to used_aiks whether or not the verdict accepts.
AttestationVerdict verify_attestation(const AttestationResponse& response, const AttestationChallenge& challenge,
                                      const PublicKey& pca_root, const ReferenceDb& refs, UsedAikSet& used_aiks,
                                      Tick now, std::string_view expected_domain = {});

// Issues challenges with nonces unique to this challenger.
class Challenger {
 public:
  explicit Challenger(Rng rng) : rng_(std::move(rng)) {}

  AttestationChallenge issue(std::vector<PcrIndex> selection, Tick now, Tick window);

 private:
  Rng rng_;
  std::set<Bytes> issued_;
};

}  // namespace tcsim
