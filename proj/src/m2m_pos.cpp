#include "tcsim/m2m_pos.hpp"

#include <algorithm>

#include "tcsim/codec.hpp"
#include "tcsim/error.hpp"

namespace tcsim {

using sim::Field;
using sim::Label;

Bytes price_list_tbs(const PriceList& list) {
  Encoder e("price-list/1");
  e.put(list.location);
  e.put_u64(list.entries.size());
  for (const auto& [good, price] : list.entries) {
    e.put(good);
    e.put_u64(price);
  }
  return e.bytes();
}

PriceList sign_price_list(const KeyPair& owner, std::vector<std::pair<std::string, std::uint64_t>> entries,
                          std::string location) {
  PriceList list{std::move(entries), std::move(location), {}};
  list.signature = sign(owner, price_list_tbs(list));
  return list;
}

bool verify_price_list(const PriceList& list, const PublicKey& owner) {
  return verify(owner, price_list_tbs(list), list.signature);
}

Bytes billing_tbs(const std::string& auth_token, std::uint64_t grand_total) {
  Encoder e("billing-package/1");
  e.put(auth_token);
  e.put_u64(grand_total);
  return e.bytes();
}

BillingPackage make_billing_package(const KeyPair& owner, std::string auth_token, std::uint64_t grand_total) {
  BillingPackage p{std::move(auth_token), grand_total, {}};
  p.signature = sign(owner, billing_tbs(p.auth_token, p.grand_total));
  return p;
}

bool verify_billing_package(const BillingPackage& pkg, const PublicKey& owner) {
  return verify(owner, billing_tbs(pkg.auth_token, pkg.grand_total), pkg.signature);
}

void check_billing_fields(const std::vector<Field>& fields) {
  std::set<std::string> names;
  for (const auto& f : fields) names.insert(f.name);
  if (names != kBillingPackageFields || fields.size() != kBillingPackageFields.size())
    throw Error(Errc::invalid_structure, "billing package must carry exactly auth_token, grand_total, signature");
}

std::vector<Field> billing_fields(const BillingPackage& pkg, std::vector<std::string> readers) {
  std::vector<Field> f{field("auth_token", Label::token, pkg.auth_token, readers),
                       field("grand_total", Label::price, std::to_string(pkg.grand_total), readers),
                       field("signature", Label::plumbing, codec::encode(pkg.signature), readers)};
  check_billing_fields(f);
  return f;
}

BillingPackage parse_billing_package(const sim::Message& m) {
  check_billing_fields(m.fields);
  return BillingPackage{m.get("auth_token"), codec::decode_u64(m.get("grand_total")),
                        codec::decode_signature(m.get("signature"))};
}

Bytes ack_tbs(const std::string& order_id, std::uint64_t total, const std::string& status) {
  Encoder e("purchase-ack/1");
  e.put(order_id);
  e.put_u64(total);
  e.put(status);
  return e.bytes();
}

namespace {

std::vector<Field> sealed(std::vector<Field> fields, bool encryption, const std::string& reader) {
  if (encryption)
    for (auto& f : fields)
      if (f.readers.empty()) f.readers = {reader};
  return fields;
}

// Two hops through the device: the POS has no network of its own.
std::optional<sim::Message> relay(World& w, const std::string& from, const std::string& via, const std::string& to,
                                  const std::string& kind, std::vector<Field> fields, bool encryption) {
  auto first_channel = w.is_platform(from) && from != via ? kShortRangeChannel : kMobileChannel;
  auto second_channel = first_channel == std::string(kShortRangeChannel) ? kMobileChannel : kShortRangeChannel;
  auto a = send(w, from, via, first_channel, kind, sealed(std::move(fields), encryption, to), encryption);
  if (!a) return std::nullopt;
  return send(w, via, to, second_channel, kind, a->fields, encryption);
}

std::uint64_t total_of(const PosState& state, const std::vector<std::string>& goods) {
  std::uint64_t total = 0;
  for (const auto& g : goods) {
    auto it = state.catalog.find(g);
    if (it == state.catalog.end()) throw Error(Errc::config_error, "good not in catalog: " + g);
    total += it->second;
  }
  return total;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

void step(World& w, const std::string& party, int n, const std::string& order) {
  w.net.annotate("fig4-step", party, {{"step", std::to_string(n)}, {"order", order}});
}

void abort_purchase(World& w, const std::string& party, const std::string& at, const std::string& reason,
                    const std::string& order) {
  w.net.annotate("abort", party, {{"step", at}, {"reason", reason}, {"order", order}});
}

std::vector<Field> price_list_fields(const PriceList& list) {
  std::vector<Field> f;
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    f.push_back(field("item" + std::to_string(i) + "_good", Label::good, list.entries[i].first));
    f.push_back(field("item" + std::to_string(i) + "_price", Label::price, std::to_string(list.entries[i].second)));
  }
  f.push_back(field("pos_location", Label::identity, list.location));
  f.push_back(field("list_signature", Label::plumbing, codec::encode(list.signature)));
  return f;
}

PriceList parse_price_list(const sim::Message& m) {
  PriceList list;
  for (std::size_t i = 0; m.has("item" + std::to_string(i) + "_good"); ++i)
    list.entries.emplace_back(m.get("item" + std::to_string(i) + "_good"),
                              codec::decode_u64(m.get("item" + std::to_string(i) + "_price")));
  list.location = m.get("pos_location");
  list.signature = codec::decode_signature(m.get("list_signature"));
  return list;
}

}  // namespace

std::optional<PosSession> mutual_attest_session(World& w, Platform& device, Platform& pos, const PosParties& parties) {
  AttestationRequest to_pos;
  to_pos.verifier = pos.id;
  to_pos.pca = parties.device_pca;
  to_pos.purpose = "pos-session";
  auto a = attest(w, device, to_pos);
  if (!a.verdict.accepted) {
    w.net.annotate("session-aborted", pos.id, {{"peer", device.id}, {"reason", a.verdict.reasons_string()}});
    return std::nullopt;
  }
  AttestationRequest to_device;
  to_device.verifier = device.id;
  to_device.pca = parties.pos_pca;
  to_device.purpose = "pos-session";
  auto b = attest(w, pos, to_device);
  if (!b.verdict.accepted) {
    w.net.annotate("session-aborted", device.id, {{"peer", pos.id}, {"reason", b.verdict.reasons_string()}});
    return std::nullopt;
  }
  w.net.annotate("channel-up", device.id,
                 {{"peer", pos.id}, {"pos_pseudonym", b.certificate->aik_public.fingerprint()}});
  return PosSession{*a.certificate, *b.certificate};
}

bool purchase_fig4(World& w, Platform& device, Platform& pos, const PosParties& p, const PosConfig& cfg,
                   PosState& state, const PosSession& session, const std::vector<std::string>& goods) {
  const auto order_id = "order-" + to_hex(w.rng.bytes(8));
  const bool enc = cfg.encryption;

  // 1: signed price list over the short-range channel.
  std::vector<std::pair<std::string, std::uint64_t>> entries(state.catalog.begin(), state.catalog.end());
  auto list = sign_price_list(w.party_key(p.pos_owner), entries, state.location);
  auto fields = price_list_fields(list);
  fields.push_back(field("order_id", Label::plumbing, order_id));
  auto m1 = send(w, pos.id, device.id, kShortRangeChannel, "price-list", fields, enc);
  if (!m1) return false;
  step(w, pos.id, 1, order_id);
  auto received = parse_price_list(*m1);
  if (!verify_price_list(received, w.party_key(p.pos_owner).public_key())) {
    abort_purchase(w, device.id, "1", "bad-price-list", order_id);
    return false;
  }
  std::uint64_t total = 0;
  for (const auto& g : goods) {
    auto it = std::find_if(received.entries.begin(), received.entries.end(), [&](const auto& e) { return e.first == g; });
    if (it == received.entries.end()) throw Error(Errc::config_error, "good not offered: " + g);
    total += it->second;
  }
  const auto& oid = m1->get("order_id");

  // 2: signed order to the operator. Goods are sealed for the vendor.
  std::vector<Field> order{field("order_id", Label::plumbing, oid),
                           field("price", Label::price, std::to_string(total)),
                           field("goods", Label::good, join(goods), enc ? std::vector<std::string>{p.vendor}
                                                                        : std::vector<std::string>{}),
                           field("payment_modality", Label::plumbing, "operator-billing")};
  if (cfg.mno_pos_check) order.push_back(field("pos_certificate", Label::token, codec::encode(session.pos_certificate)));
  Encoder otbs("purchase-order/1");
  for (const auto& f : order) otbs.put(f.value);
  order.push_back(field("signature", Label::plumbing, codec::encode(sign(w.party_key(device.id), otbs.bytes()))));
  auto m2 = send(w, device.id, p.mno, kMobileChannel, "purchase-order", order, enc);
  if (!m2) return false;
  step(w, device.id, 2, oid);

  // Operator side works only from the order it received.
  const auto mno_oid = m2->get("order_id");
  Encoder check("purchase-order/1");
  for (const auto& f : m2->fields)
    if (f.name != "signature") check.put(f.value);
  const auto& mno_key = w.party_key(p.mno);
  if (!verify(w.party_key(device.id).public_key(), check.bytes(), codec::decode_signature(m2->get("signature")))) {
    send(w, p.mno, device.id, kMobileChannel, "purchase-rejected",
         {field("order_id", Label::plumbing, mno_oid),
          field("signature", Label::plumbing, codec::encode(sign(mno_key, ack_tbs(mno_oid, 0, "rejected"))))},
         enc);
    abort_purchase(w, p.mno, "2", "bad-order-signature", mno_oid);
    return false;
  }
  if (!state.mno_seen_orders.insert(mno_oid).second) {
    abort_purchase(w, p.mno, "2", "order-replayed", mno_oid);
    return false;
  }
  auto charged = codec::decode_u64(m2->get("price"));
  if (cfg.mno_pos_check) {
    auto q = send(w, p.mno, p.pos_owner, kMobileChannel, "pos-identity-query",
                  {field("pos_certificate", Label::token, m2->get("pos_certificate"))}, enc);
    if (q) {
      auto r = send(w, p.pos_owner, p.mno, kMobileChannel, "pos-identity",
                    {field("pos_id", Label::identity, pos.id)}, enc);
      if (r) w.net.annotate("pos-identified", p.mno, {{"pos_id", r->get("pos_id")}});
    }
  }

  // 3 and 4: optional notifications.
  if (cfg.vendor_notify) {
    auto m3 = send(w, p.mno, p.vendor, kMobileChannel, "vendor-notify",
                   {field("order_id", Label::plumbing, mno_oid), *m2->find("goods")}, enc);
    if (!m3) return false;
    step(w, p.mno, 3, mno_oid);
  }
  if (cfg.payment_notify) {
    auto m4 = send(w, p.mno, p.payment_provider, kMobileChannel, "payment-notify",
                   {field("order_id", Label::plumbing, mno_oid), field("price", Label::price, std::to_string(charged))},
                   enc);
    if (!m4) return false;
    step(w, p.mno, 4, mno_oid);
  }

  // 5: signed acknowledgement to the device, 6: relayed to the POS.
  auto ack_sig = sign(mno_key, ack_tbs(mno_oid, charged, "accepted"));
  auto m5 = send(w, p.mno, device.id, kMobileChannel, "purchase-ack",
                 {field("order_id", Label::plumbing, mno_oid), field("price", Label::price, std::to_string(charged)),
                  field("ack_signature", Label::plumbing, codec::encode(ack_sig))},
                 enc);
  if (!m5) return false;
  step(w, p.mno, 5, mno_oid);
  auto relayed = m5->fields;
  relayed.push_back(field("goods", Label::good, join(goods)));
  auto m6 = send(w, device.id, pos.id, kShortRangeChannel, "purchase-ack", relayed, enc);
  if (!m6) return false;
  step(w, device.id, 6, oid);

  // 7: the POS checks the operator's signature before delivering.
  bool ok = false;
  try {
    ok = m6->get("order_id") == order_id &&
         verify(mno_key.public_key(), ack_tbs(order_id, codec::decode_u64(m6->get("price")), "accepted"),
                codec::decode_signature(m6->get("ack_signature")));
  } catch (const Error&) {
    ok = false;
  }
  if (!ok) {
    abort_purchase(w, pos.id, "7", "bad-ack-signature", order_id);
    return false;
  }
  w.net.annotate("delivery", pos.id, {{"order", order_id}, {"goods", m6->get("goods")}, {"flow", "fig4"}});
  step(w, pos.id, 7, order_id);
  return true;
}

namespace {

// Returns "ok" or the rejection reason.
std::string validate_token(World& w, const std::string& auth_provider, std::set<std::string>& used,
                           const sim::Message& m) {
  auto cert = codec::decode_certificate(m.get("auth_token"));
  auto quote = codec::decode_quote(m.get("token_quote"));
  auto nonce = codec::decode_hex(m.get("nonce"));
  auto fp = cert.aik_public.fingerprint();
  if (used.count(fp)) return "token-reused";
  if (!verify_aik_certificate(cert, w.pca(auth_provider).root())) return "bad-token-certificate";
  if (!certificate_valid_at(cert, w.net.now())) return "token-expired";
  if (!quote.pcr_selection.empty() || quote.nonce != nonce || !verify_quote_signature(quote, cert.aik_public))
    return "bad-token-proof";
  used.insert(fp);
  return "ok";
}

}  // namespace

bool purchase_sep_duties(World& w, Platform& device, Platform& pos, const PosParties& p, const PosConfig& cfg,
                         PosState& state, const std::vector<std::string>& goods, bool reuse_token) {
  const auto order_id = "order-" + to_hex(w.rng.bytes(8));
  const bool enc = cfg.encryption;
  const auto total = total_of(state, goods);

  // (i) one-time token: AIK certificate plus a quote over the POS nonce.
  auto nonce = w.rng.bytes(16);
  auto ch = send(w, pos.id, device.id, kShortRangeChannel, "token-challenge",
                 {field("nonce", Label::plumbing, to_hex(nonce)), field("order_id", Label::plumbing, order_id)}, enc);
  if (!ch) return false;
  std::vector<Field> token;
  if (reuse_token && !state.last_token.empty()) {
    token = state.last_token;
    w.net.annotate("attack", device.id, {{"name", "reuse-token"}, {"order", order_id}});
  } else {
    replenish_if_needed(w, device, p.device_pca);
    auto cred = device.wallets[p.device_pca].take_for_service();
    if (!cred) throw Error(Errc::aik_unknown, device.id + " has no token left");
    auto quote = device.anchor->quote(cred->handle, {}, codec::decode_hex(ch->get("nonce")));
    token = {field("auth_token", Label::token, codec::encode(cred->certificate)),
             field("token_quote", Label::plumbing, codec::encode(quote))};
    replenish_if_needed(w, device, p.device_pca);
  }
  state.last_token = token;
  auto presented = token;
  presented.push_back(field("goods", Label::good, join(goods)));
  auto m_i = send(w, device.id, pos.id, kShortRangeChannel, "auth-token", presented, enc);
  if (!m_i) return false;
  w.net.annotate("sep-step", pos.id, {{"step", "i"}, {"order", order_id}});

  // (ii) token validation by the POS owner, or by the auth provider directly.
  const auto validator = cfg.direct_token_check ? p.auth_provider : p.pos_owner;
  auto fwd = relay(w, pos.id, device.id, validator, cfg.direct_token_check ? "token-check" : "token-forward",
                   {field("auth_token", Label::token, m_i->get("auth_token")),
                    field("token_quote", Label::plumbing, m_i->get("token_quote")),
                    field("nonce", Label::plumbing, to_hex(nonce))},
                   enc);
  if (!fwd) return false;
  auto& used = cfg.direct_token_check ? state.auth_used_tokens : state.owner_used_tokens;
  auto status = validate_token(w, p.auth_provider, used, *fwd);
  w.net.annotate("token-validated", validator, {{"order", order_id}, {"status", status}});
  auto verdict = relay(w, validator, device.id, pos.id, "token-verdict",
                       {field("status", Label::plumbing, status),
                        field("signature", Label::plumbing,
                              codec::encode(sign(w.party_key(validator), ack_tbs(to_hex(nonce), 0, status))))},
                       enc);
  if (!verdict) return false;
  bool token_ok = verdict->get("status") == "ok" &&
                  verify(w.party_key(validator).public_key(), ack_tbs(to_hex(nonce), 0, "ok"),
                         codec::decode_signature(verdict->get("signature")));
  if (!token_ok) {
    abort_purchase(w, pos.id, "ii", verdict->get("status"), order_id);
    return false;
  }
  w.net.annotate("sep-step", pos.id, {{"step", "ii"}, {"order", order_id}});

  // (iii) billing: goods stay with the POS owner, the charging provider gets
  // only the token and the grand total.
  const auto& owner_key = w.party_key(p.pos_owner);
  const auto& charging_key = w.party_key(p.charging_provider);
  const auto& tok = m_i->get("auth_token");
  std::optional<sim::Message> confirmation;
  if (!cfg.decentralised) {
    auto bill = relay(w, pos.id, device.id, p.pos_owner, "billing-data",
                      {field("order_id", Label::plumbing, order_id), field("auth_token", Label::token, tok),
                       field("goods", Label::good, join(goods)), field("total", Label::price, std::to_string(total))},
                      enc);
    if (!bill) return false;
    auto pkg = make_billing_package(owner_key, bill->get("auth_token"), codec::decode_u64(bill->get("total")));
    auto m = send(w, p.pos_owner, p.charging_provider, kMobileChannel, "billing-package",
                  billing_fields(pkg, enc ? std::vector<std::string>{p.charging_provider} : std::vector<std::string>{}),
                  enc);
    if (!m) return false;
    w.net.annotate("sep-step", p.pos_owner, {{"step", "iii"}, {"order", order_id}});
    auto got = parse_billing_package(*m);
    bool charged = verify_billing_package(got, owner_key.public_key()) && got.grand_total <= cfg.charge_limit;
    std::string st = charged ? "charged" : "refused";
    w.net.annotate("charge", p.charging_provider, {{"status", st}, {"total", std::to_string(got.grand_total)}});
    confirmation = send(w, p.charging_provider, p.pos_owner, kMobileChannel, "charge-confirmation",
                        {field("auth_token", Label::token, got.auth_token), field("status", Label::plumbing, st),
                         field("signature", Label::plumbing,
                               codec::encode(sign(charging_key, ack_tbs(got.auth_token, got.grand_total, st))))},
                        enc);
    if (!confirmation) return false;
    bool confirmed = confirmation->get("status") == "charged" &&
                     verify(charging_key.public_key(), ack_tbs(tok, total, "charged"),
                            codec::decode_signature(confirmation->get("signature")));
    auto st_owner = confirmed ? "charged" : "refused";
    auto ack = relay(w, p.pos_owner, device.id, pos.id, "purchase-ack",
                     {field("order_id", Label::plumbing, order_id), field("status", Label::plumbing, st_owner),
                      field("signature", Label::plumbing,
                            codec::encode(sign(owner_key, ack_tbs(order_id, total, st_owner))))},
                     enc);
    if (!ack) return false;
    bool delivered = ack->get("status") == "charged" &&
                     verify(owner_key.public_key(), ack_tbs(order_id, total, "charged"),
                            codec::decode_signature(ack->get("signature")));
    if (!delivered) {
      abort_purchase(w, pos.id, "iv", "charge-refused", order_id);
      return false;
    }
  } else {
    // The POS holds the owner's billing key and talks to the charging provider itself.
    auto pkg = make_billing_package(owner_key, tok, total);
    auto m = relay(w, pos.id, device.id, p.charging_provider, "billing-package",
                   billing_fields(pkg, {}), enc);
    if (!m) return false;
    w.net.annotate("sep-step", pos.id, {{"step", "iii"}, {"order", order_id}});
    auto got = parse_billing_package(*m);
    bool charged = verify_billing_package(got, owner_key.public_key()) && got.grand_total <= cfg.charge_limit;
    std::string st = charged ? "charged" : "refused";
    w.net.annotate("charge", p.charging_provider, {{"status", st}, {"total", std::to_string(got.grand_total)}});
    confirmation = relay(w, p.charging_provider, device.id, pos.id, "charge-confirmation",
                         {field("auth_token", Label::token, got.auth_token), field("status", Label::plumbing, st),
                          field("signature", Label::plumbing,
                                codec::encode(sign(charging_key, ack_tbs(got.auth_token, got.grand_total, st))))},
                         enc);
    if (!confirmation) return false;
    bool confirmed = confirmation->get("status") == "charged" &&
                     verify(charging_key.public_key(), ack_tbs(tok, total, "charged"),
                            codec::decode_signature(confirmation->get("signature")));
    if (!confirmed) {
      abort_purchase(w, pos.id, "iv", "charge-refused", order_id);
      return false;
    }
  }
  w.net.annotate("sep-step", pos.id, {{"step", "iv"}, {"order", order_id}});
  w.net.annotate("delivery", pos.id, {{"order", order_id}, {"goods", join(goods)}, {"flow", "sep-duties"}});
  return true;
}

void rotate_pos_pseudonym(World& w, Platform& pos, const std::string& pos_pca) {
  pos.wallets.erase(pos_pca);
  if (enroll(w, pos, pos_pca, w.options.batch_size)) w.net.annotate("pos-rotated", pos.id, {{"pca", pos_pca}});
}

}  // namespace tcsim
