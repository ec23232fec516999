#include "tcsim/protocol.hpp"

#include "tcsim/codec.hpp"
#include "tcsim/error.hpp"

namespace tcsim {

std::string_view to_string(GenericAttack a) {
  switch (a) {
    case GenericAttack::forge_log: return "forge-log";
    case GenericAttack::tamper: return "tamper";
    case GenericAttack::replay_aik: return "replay-aik";
    case GenericAttack::wrong_nonce: return "wrong-nonce";
    case GenericAttack::expired_cert: return "expired-cert";
  }
  return "";
}

std::optional<GenericAttack> generic_attack_from_string(std::string_view s) {
  for (auto a : kAllGenericAttacks)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

Reason expected_reason(GenericAttack a) {
  switch (a) {
    case GenericAttack::forge_log: return Reason::log_pcr_mismatch;
    case GenericAttack::tamper: return Reason::reference_mismatch;
    case GenericAttack::replay_aik: return Reason::aik_reused;
    case GenericAttack::wrong_nonce: return Reason::stale_nonce;
    case GenericAttack::expired_cert: return Reason::cert_expired;
  }
  return Reason::ok;
}

void Platform::boot_chain(std::vector<BootComponent> c) {
  anchor->reset();
  chain = std::move(c);
  log = boot(*anchor, chain);
}

World::World(std::uint64_t seed, WorldOptions opts) : rng(seed), options(opts) {
  Rng maker_rng = rng.fork("manufacturer");
  maker_ = std::make_unique<Manufacturer>("acme-tpm", maker_rng);
}

void World::add_party(const std::string& id, const std::string& role) { net.add_party(id, role); }

void World::add_channels(const std::string& carrier) {
  net.add_channel({kMobileChannel, sim::ChannelKind::mobile_network, carrier});
  net.add_channel({kShortRangeChannel, sim::ChannelKind::short_range, ""});
}

void World::register_chain(const std::string& name, std::vector<BootComponent> chain) {
  refs_[name] = ReferenceDb::from_chain(chain);
  chains_[name] = std::move(chain);
}

const std::vector<BootComponent>& World::chain(const std::string& name) const {
  auto it = chains_.find(name);
  if (it == chains_.end()) throw Error(Errc::config_error, "unknown chain " + name);
  return it->second;
}

const ReferenceDb& World::refs(const std::string& chain_name) const {
  auto it = refs_.find(chain_name);
  if (it == refs_.end()) throw Error(Errc::config_error, "unknown chain " + chain_name);
  return it->second;
}

Digest160 World::reference_pcr(const std::string& chain_name) const {
  Digest160 acc;
  for (const auto& c : chain(chain_name))
    if (c.pcr.value_or(kBootPcr) == kBootPcr) acc = extend_value(acc, hash160(c.payload));
  return acc;
}

Platform& World::add_platform(const std::string& id, const std::string& chain_name) {
  Rng r = rng.fork("anchor:" + id);
  Platform p;
  p.id = id;
  p.chain_name = chain_name;
  p.anchor = std::make_unique<TrustAnchor>(maker_->manufacture("mobile-tpm", r));
  p.boot_chain(chain(chain_name));
  auto [it, fresh] = platforms_.emplace(id, std::move(p));
  if (!fresh) throw Error(Errc::config_error, "duplicate platform " + id);
  return it->second;
}

Platform& World::platform(const std::string& id) {
  auto it = platforms_.find(id);
  if (it == platforms_.end()) throw Error(Errc::unknown_party, id);
  return it->second;
}

PcaParty& World::add_pca(const std::string& id, const std::string& domain) {
  PcaParty p{id, std::make_unique<PrivacyCa>(domain, party_key(id), std::vector<PublicKey>{maker_->root()},
                                             options.validity)};
  return pcas_.emplace(id, std::move(p)).first->second;
}

PrivacyCa& World::pca(const std::string& id) {
  auto it = pcas_.find(id);
  if (it == pcas_.end()) throw Error(Errc::unknown_party, id + " is not a privacy CA");
  return *it->second.ca;
}

VerifierState& World::verifier(const std::string& id) {
  auto it = verifiers_.find(id);
  if (it == verifiers_.end()) {
    VerifierState v;
    v.challenger = std::make_unique<Challenger>(rng.fork("challenger:" + id));
    it = verifiers_.emplace(id, std::move(v)).first;
  }
  return it->second;
}

UsedAikSet& World::used_aiks(const std::string& verifier_id, const std::string& domain) {
  if (options.shared_used_set) return domain_used_[domain];
  return verifier(verifier_id).used;
}

KeyPair& World::party_key(const std::string& id) {
  auto it = keys_.find(id);
  if (it == keys_.end()) {
    Rng r = rng.fork("key:" + id);
    it = keys_.emplace(id, keygen(r)).first;
  }
  return it->second;
}

sim::Field field(std::string name, sim::Label label, std::string value, std::vector<std::string> readers) {
  return sim::Field{std::move(name), label, std::move(value), std::move(readers)};
}

std::optional<sim::Message> send(World& w, const std::string& from, const std::string& to, const std::string& channel,
                                 const std::string& kind, std::vector<sim::Field> fields, bool encrypted) {
  sim::Message m;
  m.sender = from;
  m.receiver = to;
  m.channel = channel;
  m.kind = kind;
  m.encrypted = encrypted;
  m.fields = std::move(fields);
  return w.net.deliver(std::move(m));
}

using sim::Label;

bool enroll(World& w, Platform& p, const std::string& pca_id, std::size_t batch_size) {
  auto& ca = w.pca(pca_id);
  auto records = p.anchor->create_aik_batch(batch_size, w.rng);
  std::vector<PublicKey> pubs;
  for (const auto& r : records) pubs.push_back(r.public_key);

  auto req = send(w, p.id, pca_id, kMobileChannel, "ek-enroll-request",
                  {field("ek_certificate", Label::identity, codec::encode(p.anchor->ek_certificate()))}, true);
  if (!req) return false;
  auto challenge = ca.issue_ek_challenge(w.rng);
  auto ch = send(w, pca_id, p.id, kMobileChannel, "ek-challenge",
                 {field("challenge", Label::plumbing, to_hex(challenge))}, true);
  if (!ch) return false;
  auto got = codec::decode_hex(ch->get("challenge"));
  auto resp = send(w, p.id, pca_id, kMobileChannel, "ek-enroll",
                   {field("response", Label::plumbing, codec::encode(p.anchor->ek_challenge_response(got))),
                    field("aik_publics", Label::plumbing, codec::encode_keys(pubs))},
                   true);
  if (!resp) return false;
  std::vector<AikCertificate> certs;
  try {
    auto ek = codec::decode_ek_certificate(req->get("ek_certificate"));
    certs = ca.enroll(ek, codec::decode_keys(resp->get("aik_publics")), challenge,
                      codec::decode_signature(resp->get("response")), w.net.now());
  } catch (const Error& e) {
    send(w, pca_id, p.id, kMobileChannel, "enroll-rejected",
         {field("reason", Label::plumbing, std::string(to_string(e.code())))}, true);
    w.net.annotate("enroll-rejected", pca_id, {{"device", p.id}, {"reason", std::string(to_string(e.code()))}});
    return false;
  }
  auto out = send(w, pca_id, p.id, kMobileChannel, "aik-certificates",
                  {field("certificates", Label::token, codec::encode_certificates(certs))}, true);
  if (!out) return false;
  p.wallets[pca_id].add_batch(records, codec::decode_certificates(out->get("certificates")));
  w.net.annotate("enrolled", p.id, {{"pca", pca_id}, {"count", std::to_string(certs.size())}});
  return true;
}

bool replenish_if_needed(World& w, Platform& p, const std::string& pca_id) {
  auto& wallet = p.wallets[pca_id];
  if (!wallet.needs_replenishment()) return false;
  auto prepared = prepare_replenishment(*p.anchor, wallet, w.options.batch_size, w.rng);
  auto req = send(w, p.id, pca_id, kMobileChannel, "replenish-request",
                  {field("old_certificate", Label::token, codec::encode(prepared.request.old_certificate)),
                   field("new_aiks", Label::plumbing, codec::encode_keys(prepared.request.new_aiks)),
                   field("signature", Label::plumbing, codec::encode(prepared.request.signature))},
                  true);
  if (!req) return false;
  std::vector<AikCertificate> certs;
  try {
    ReplenishRequest parsed{codec::decode_certificate(req->get("old_certificate")),
                            codec::decode_keys(req->get("new_aiks")),
                            codec::decode_signature(req->get("signature"))};
    certs = w.pca(pca_id).replenish(parsed, w.net.now());
  } catch (const Error& e) {
    send(w, pca_id, p.id, kMobileChannel, "replenish-rejected",
         {field("reason", Label::plumbing, std::string(to_string(e.code())))}, true);
    w.net.annotate("replenish-rejected", pca_id, {{"device", p.id}, {"reason", std::string(to_string(e.code()))}});
    return false;
  }
  auto out = send(w, pca_id, p.id, kMobileChannel, "aik-certificates",
                  {field("certificates", Label::token, codec::encode_certificates(certs))}, true);
  if (!out) return false;
  wallet.add_batch(prepared.new_records, codec::decode_certificates(out->get("certificates")));
  w.net.annotate("replenish", p.id, {{"pca", pca_id}, {"count", std::to_string(certs.size())}});
  return true;
}

namespace {

void record_verdict(World& w, const Platform& prover, const AttestationRequest& req, const AttestationVerdict& v,
                    const AikCertificate& cert, const std::string& attack) {
  std::map<std::string, std::string> attrs{{"prover", prover.id},
                                           {"accepted", v.accepted ? "true" : "false"},
                                           {"reasons", v.reasons_string()},
                                           {"aik", cert.aik_public.fingerprint()},
                                           {"purpose", req.purpose}};
  if (!attack.empty()) attrs["attack"] = attack;
  w.net.annotate("attestation", req.verifier, std::move(attrs));
}

}  // namespace

AttestationOutcome attest(World& w, Platform& prover, const AttestationRequest& req) {
  std::optional<GenericAttack> attack;
  if (w.generic_attack && !w.generic_fired) {
    attack = w.generic_attack;
    w.generic_fired = true;
  }
  const std::string attack_name = attack ? std::string(to_string(*attack)) : "";

  if (attack == GenericAttack::expired_cert) w.net.idle(w.options.validity + 1);
  if (attack == GenericAttack::tamper || attack == GenericAttack::forge_log) {
    auto victim = prover.chain.back().name;
    auto payload = prover.chain.back().payload;
    payload.push_back('!');
    prover.boot_chain(tamper(prover.chain, victim, payload));
    if (attack == GenericAttack::forge_log) {
      auto ref = w.refs(prover.chain_name).find(victim);
      prover.log = forge_log(prover.log, prover.log.entries.size() - 1, ref.value_or(Digest160{}));
    }
    w.net.annotate("attack", prover.id, {{"name", attack_name}, {"component", victim}});
  }

  auto& verifier = w.verifier(req.verifier);
  const auto challenge = verifier.challenger->issue(req.selection, w.net.now(), w.options.freshness_window);

  if (attack == GenericAttack::wrong_nonce) {
    auto armed = std::make_shared<bool>(true);
    w.net.add_hook([armed](sim::Message& m) {
      if (*armed && m.kind == "attest-challenge") {
        *armed = false;
        for (auto& f : m.fields) {
          if (f.name != "nonce") continue;
          auto b = from_hex(f.value);
          b.at(0) ^= 0xff;
          f.value = to_hex(b);
        }
      }
      return true;
    });
    w.net.annotate("attack", req.verifier, {{"name", attack_name}});
  }

  auto ch = send(w, req.verifier, prover.id, req.channel, "attest-challenge",
                 {field("nonce", Label::plumbing, to_hex(challenge.nonce)),
                  field("selection", Label::plumbing, codec::encode_selection(challenge.pcr_selection)),
                  field("deadline", Label::plumbing, std::to_string(challenge.freshness_deadline))},
                 req.encrypted);
  AttestationOutcome out;
  if (!ch) return out;

  // Prover side works only from what it received.
  auto nonce = codec::decode_hex(ch->get("nonce"));
  auto selection = codec::decode_selection(ch->get("selection"));
  auto& wallet = prover.wallets[req.pca];
  replenish_if_needed(w, prover, req.pca);
  auto cred = wallet.take_for_service();
  if (!cred) throw Error(Errc::aik_unknown, prover.id + " holds no usable credential from " + req.pca);
  auto quote = prover.anchor->quote(cred->handle, selection, nonce);
  std::vector<sim::Field> fields{field("quote", Label::plumbing, codec::encode(quote)),
                                 field("log", Label::plumbing, codec::encode(prover.log)),
                                 field("certificate", Label::token, codec::encode(cred->certificate))};
  if (req.extra)
    for (auto& f : req.extra(nonce)) fields.push_back(std::move(f));
  auto resp = send(w, prover.id, req.verifier, req.channel, "attest-response", fields, req.encrypted);
  if (!resp) return out;

  auto parse = [](const sim::Message& m) {
    return AttestationResponse{codec::decode_quote(m.get("quote")), codec::decode_log(m.get("log")),
                               codec::decode_certificate(m.get("certificate"))};
  };
  auto response = parse(*resp);
  const auto& ca = w.pca(req.trusted_pca.empty() ? req.pca : req.trusted_pca);
  auto& used = w.used_aiks(req.verifier, ca.domain());
  out.verdict = verify_attestation(response, challenge, ca.root(), w.refs(prover.chain_name), used, w.net.now(),
                                   ca.domain());
  out.certificate = response.certificate;
  out.response = resp;
  bool target = attack && attack != GenericAttack::replay_aik;
  record_verdict(w, prover, req, out.verdict, response.certificate, target ? attack_name : "");

  if (attack == GenericAttack::replay_aik) {
    w.net.annotate("attack", prover.id, {{"name", attack_name}});
    auto replay = send(w, prover.id, req.verifier, req.channel, "attest-response", resp->fields, req.encrypted);
    if (replay) {
      auto replayed = parse(*replay);
      auto v = verify_attestation(replayed, challenge, ca.root(), w.refs(prover.chain_name), used, w.net.now(),
                                  ca.domain());
      record_verdict(w, prover, req, v, replayed.certificate, attack_name);
    }
  }
  replenish_if_needed(w, prover, req.pca);
  if (attack) throw Halted{attack_name + " handled"};
  return out;
}

}  // namespace tcsim
