#include "tcsim/attestation.hpp"

#include <array>

namespace tcsim {

namespace {

constexpr std::array<std::pair<Reason, std::string_view>, 8> kReasonNames{{
    {Reason::ok, "ok"},
    {Reason::bad_cert_chain, "bad-cert-chain"},
    {Reason::cert_expired, "cert-expired"},
    {Reason::aik_reused, "aik-reused"},
    {Reason::bad_quote_signature, "bad-quote-signature"},
    {Reason::stale_nonce, "stale-nonce"},
    {Reason::log_pcr_mismatch, "log-pcr-mismatch"},
    {Reason::reference_mismatch, "reference-mismatch"},
}};

}  // namespace

std::string_view to_string(Reason r) {
  for (const auto& [reason, name] : kReasonNames)
    if (reason == r) return name;
  return "unknown";
}

std::optional<Reason> reason_from_string(std::string_view s) {
  for (const auto& [reason, name] : kReasonNames)
    if (name == s) return reason;
  return std::nullopt;
}

bool AttestationVerdict::has(Reason r) const {
  for (auto x : reasons)
    if (x == r) return true;
  return false;
}

std::string AttestationVerdict::reasons_string() const {
  std::string out;
  for (auto r : reasons) {
    if (!out.empty()) out += ",";
    out += to_string(r);
  }
  return out;
}

Digest160 recompute_pcr(const MeasurementLog& log) {
  Digest160 acc;
  for (const auto& e : log.entries) acc = extend_value(acc, e.measurement);
  return acc;
}

Digest160 recompute_pcr(const MeasurementLog& log, PcrIndex pcr) {
  Digest160 acc;
  for (const auto& e : log.entries)
    if (e.pcr == pcr) acc = extend_value(acc, e.measurement);
  return acc;
}

AttestationVerdict verify_attestation(const AttestationResponse& response, const AttestationChallenge& challenge,
                                      const PublicKey& pca_root, const ReferenceDb& refs, UsedAikSet& used_aiks,
                                      Tick now, std::string_view expected_domain) {
  const auto& cert = response.certificate;
  const auto& quote = response.quote;
  AttestationVerdict v;

  const bool chain_ok = verify_aik_certificate(cert, pca_root) &&
                        (expected_domain.empty() || cert.domain_id == expected_domain);
  if (!chain_ok) v.reasons.push_back(Reason::bad_cert_chain);
  if (!certificate_valid_at(cert, now)) v.reasons.push_back(Reason::cert_expired);

  const std::string aik = cert.aik_public.fingerprint();
  if (!used_aiks.insert(aik).second) v.reasons.push_back(Reason::aik_reused);

  if (!verify_quote_signature(quote, cert.aik_public)) v.reasons.push_back(Reason::bad_quote_signature);

  if (quote.nonce != challenge.nonce || now > challenge.freshness_deadline) v.reasons.push_back(Reason::stale_nonce);

  bool log_ok = quote.pcr_selection == challenge.pcr_selection && quote.pcr_values.size() == quote.pcr_selection.size();
  for (std::size_t i = 0; log_ok && i < quote.pcr_selection.size(); ++i)
    log_ok = recompute_pcr(response.log, quote.pcr_selection[i]) == quote.pcr_values[i];
  if (!log_ok) v.reasons.push_back(Reason::log_pcr_mismatch);

  for (const auto& entry : response.log.entries) {
    if (!refs.matches(entry)) {
      v.reasons.push_back(Reason::reference_mismatch);
      break;
    }
  }

  v.accepted = v.reasons.empty();
  if (v.accepted) v.reasons.push_back(Reason::ok);
  return v;
}

AttestationChallenge Challenger::issue(std::vector<PcrIndex> selection, Tick now, Tick window) {
  Bytes nonce;
  do {
    nonce = rng_.bytes(kMinNonceSize);
  } while (!issued_.insert(nonce).second);
  return AttestationChallenge{std::move(nonce), std::move(selection), now + window};
}

}  // namespace tcsim
