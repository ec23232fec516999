#include "tcsim/domain_restriction.hpp"

#include "tcsim/codec.hpp"
#include "tcsim/error.hpp"

namespace tcsim {

using sim::Label;

const PublicKey* Mno::subscriber(const std::string& identity) const {
  auto it = subscribers_.find(identity);
  return it == subscribers_.end() ? nullptr : &it->second;
}

std::string trust_fingerprint(const AikCertificate& cert) { return sha256_hex(cert.aik_public.bytes); }

std::string_view to_string(RegistryMode m) { return m == RegistryMode::bound ? "bound" : "unbound"; }

std::optional<RegistryMode> registry_mode_from_string(std::string_view s) {
  if (s == "bound") return RegistryMode::bound;
  if (s == "unbound") return RegistryMode::unbound;
  return std::nullopt;
}

std::string_view to_string(Admission a) {
  switch (a) {
    case Admission::admitted: return "admitted";
    case Admission::attestation_failed: return "attestation-failed";
    case Admission::clone_conflict: return "clone-conflict";
    case Admission::credential_inconsistency: return "credential-inconsistency";
  }
  return "";
}

Admission SubdomainRegistry::decide(const std::string& identity, const std::string& fingerprint,
                                    bool attestation_accepted) const {
  if (!attestation_accepted) return Admission::attestation_failed;
  if (mode_ == RegistryMode::bound && !bindings_.count({identity, fingerprint}))
    return Admission::credential_inconsistency;
  auto it = admitted_.find(identity);
  if (it != admitted_.end() && it->second != fingerprint) return Admission::clone_conflict;
  return Admission::admitted;
}

Admission SubdomainRegistry::request(const std::string& identity, const std::string& fingerprint,
                                     bool attestation_accepted) {
  auto a = decide(identity, fingerprint, attestation_accepted);
  if (a == Admission::admitted) admitted_.emplace(identity, fingerprint);
  return a;
}

bool SubdomainRegistry::is_admitted(const std::string& identity, const std::string& fingerprint) const {
  auto it = admitted_.find(identity);
  return it != admitted_.end() && it->second == fingerprint;
}

FeatureMap effective_features(const FeaturePolicy& policy, const std::string& location) {
  FeatureMap out = policy.features;
  for (const auto& rule : policy.location_rules) {
    if (rule.cell != location) continue;
    for (const auto& [name, f] : rule.overrides) out[name] = f;
    break;
  }
  return out;
}

std::optional<FeatureMap> apply_policy(bool enforcer_measured, bool attestation_accepted, const FeaturePolicy& policy,
                                       const std::string& location) {
  if (!enforcer_measured || !attestation_accepted) return std::nullopt;
  return effective_features(policy, location);
}

std::string describe(const FeatureMap& features) {
  std::string out;
  for (const auto& [name, f] : features) {
    if (!out.empty()) out += ',';
    out += name + (f == Feature::enabled ? "=enabled" : "=disabled");
  }
  return out;
}

namespace {

Feature parse_feature(const nlohmann::json& j) {
  auto s = j.get<std::string>();
  if (s == "enabled") return Feature::enabled;
  if (s == "disabled") return Feature::disabled;
  throw Error(Errc::config_error, "feature state must be enabled or disabled, got " + s);
}

}  // namespace

FeaturePolicy parse_feature_policy(const nlohmann::json& j) {
  FeaturePolicy p;
  try {
    for (const auto& [name, v] : j.at("features").items()) p.features[name] = parse_feature(v);
    if (j.contains("location_rules")) {
      for (const auto& r : j.at("location_rules")) {
        LocationRule rule{r.at("cell").get<std::string>(), {}};
        for (const auto& [name, v] : r.at("overrides").items()) rule.overrides[name] = parse_feature(v);
        p.location_rules.push_back(std::move(rule));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, std::string("feature policy: ") + e.what());
  }
  return p;
}

bool chain_measures(const MeasurementLog& log, const std::string& component) {
  for (const auto& e : log.entries)
    if (e.component == component) return true;
  return false;
}

std::optional<std::string> network_access(World& w, const Mno& mno, const std::string& device,
                                          const GenericCredential& c) {
  auto attach = send(w, device, mno.id(), kMobileChannel, "network-attach",
                     {field("subscriber_id", Label::identity, c.device_identity)}, false);
  if (!attach) return std::nullopt;
  const auto& claimed = attach->get("subscriber_id");
  const auto* key = mno.subscriber(claimed);
  if (!key) {
    send(w, mno.id(), device, kMobileChannel, "network-denied",
         {field("reason", Label::plumbing, std::string(to_string(Errc::unknown_identity)))}, false);
    w.net.annotate("network-session", mno.id(), {{"device", device}, {"granted", "false"}, {"reason", "unknown-identity"}});
    return std::nullopt;
  }
  auto nonce = w.rng.bytes(16);
  auto ch = send(w, mno.id(), device, kMobileChannel, "attach-challenge", {field("nonce", Label::plumbing, to_hex(nonce))},
                 false);
  if (!ch) return std::nullopt;
  Encoder tbs("network-attach/1");
  tbs.put(codec::decode_hex(ch->get("nonce")));
  auto resp = send(w, device, mno.id(), kMobileChannel, "attach-response",
                   {field("signature", Label::plumbing, codec::encode(sign(c.key, tbs.bytes())))}, false);
  if (!resp) return std::nullopt;
  Encoder expect("network-attach/1");
  expect.put(nonce);
  bool ok = verify(*key, expect.bytes(), codec::decode_signature(resp->get("signature")));
  send(w, mno.id(), device, kMobileChannel, ok ? "network-session" : "network-denied",
       {field("status", Label::plumbing, ok ? "granted" : "bad-signature")}, false);
  w.net.annotate("network-session", mno.id(),
                 {{"device", device}, {"granted", ok ? "true" : "false"}, {"reason", ok ? "ok" : "bad-signature"}});
  if (!ok) return std::nullopt;
  return claimed;
}

void authority_bind(World& w, const std::string& authority, SubdomainRegistry& registry, Platform& device,
                    const std::string& identity, const std::string& pca) {
  auto next = device.wallets[pca].peek_for_service();
  if (!next) throw Error(Errc::aik_unknown, device.id + " has no credential to bind");
  auto m = send(w, device.id, authority, kMobileChannel, "joint-enroll",
                {field("subscriber_id", Label::identity, identity),
                 field("trust_fingerprint", Label::token, trust_fingerprint(next->certificate))},
                true);
  if (!m) return;
  registry.bind(m->get("subscriber_id"), m->get("trust_fingerprint"));
  w.net.annotate("binding", authority,
                 {{"device", device.id}, {"identity", identity}, {"fingerprint", m->get("trust_fingerprint")}});
}

Admission request_subdomain(World& w, const std::string& mno, SubdomainRegistry& registry, Platform& device,
                            const std::string& identity, const std::string& pca) {
  AttestationRequest req;
  req.verifier = mno;
  req.pca = pca;
  req.channel = kMobileChannel;
  req.purpose = "subdomain";
  req.encrypted = true;
  req.extra = [&](const Bytes&) {
    return std::vector<sim::Field>{field("subscriber_id", Label::identity, identity)};
  };
  auto out = attest(w, device, req);
  if (!out.response) return Admission::attestation_failed;
  const auto& claimed = out.response->get("subscriber_id");
  auto fp = trust_fingerprint(*out.certificate);
  auto result = registry.request(claimed, fp, out.verdict.accepted);
  send(w, mno, device.id, kMobileChannel, "subdomain-verdict",
       {field("result", Label::policy, std::string(to_string(result)))}, true);
  w.net.annotate("subdomain-admission", mno,
                 {{"device", device.id},
                  {"identity", claimed},
                  {"fingerprint", fp},
                  {"mode", std::string(to_string(registry.mode()))},
                  {"result", std::string(to_string(result))}});
  return result;
}

std::optional<FeatureMap> push_policy(World& w, const std::string& issuer, Platform& device, const std::string& pca,
                                      const FeaturePolicy& policy, const std::string& location,
                                      const std::string& channel) {
  AttestationRequest req;
  req.verifier = issuer;
  req.pca = pca;
  req.channel = channel;
  req.purpose = "policy";
  req.encrypted = true;
  auto out = attest(w, device, req);
  bool measured = out.response && chain_measures(codec::decode_log(out.response->get("log")), kEnforcerComponent);
  auto map = apply_policy(measured, out.verdict.accepted, policy, location);
  auto text = map ? describe(*map) : std::string("unenforced");
  send(w, issuer, device.id, channel, "feature-policy",
       {field("location", Label::policy, location), field("features", Label::policy, text)}, true);
  w.net.annotate("policy-applied", issuer, {{"device", device.id}, {"location", location}, {"features", text}});
  return map;
}

}  // namespace tcsim
