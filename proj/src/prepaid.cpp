#include "tcsim/prepaid.hpp"

#include "tcsim/codec.hpp"
#include "tcsim/domain_restriction.hpp"
#include "tcsim/error.hpp"

namespace tcsim {

using sim::Label;

PrepaidOperator::PrepaidOperator(std::string id, PpImsiPool pool, std::map<std::string, std::uint64_t> tariffs,
                                 KeyPair voucher_key, PublicKey group_key)
    : id_(std::move(id)),
      pool_(std::move(pool)),
      tariffs_(std::move(tariffs)),
      voucher_key_(std::move(voucher_key)),
      group_key_(std::move(group_key)) {
  if (pool_.imsis.empty()) throw Error(Errc::config_error, "empty ppIMSI pool");
}

bool PrepaidOperator::in_pool(const std::string& imsi) const {
  for (const auto& i : pool_.imsis)
    if (i == imsi) return true;
  return false;
}

std::uint64_t PrepaidOperator::cost(const std::string& service, std::uint64_t units) const {
  auto it = tariffs_.find(service);
  if (it == tariffs_.end()) throw Error(Errc::config_error, "no tariff for " + service);
  return it->second * units;
}

Voucher PrepaidOperator::issue_voucher(std::uint64_t value) {
  return tcsim::issue_voucher(voucher_key_, id_ + "-v" + std::to_string(next_voucher_++), value);
}

std::string_view to_string(PrepaidOutcome o) {
  switch (o) {
    case PrepaidOutcome::granted: return "granted";
    case PrepaidOutcome::insufficient_balance: return "insufficient-balance";
    case PrepaidOutcome::attestation_rejected: return "attestation-rejected";
    case PrepaidOutcome::bad_statement: return "bad-statement";
  }
  return "";
}

Bytes balance_statement_tbs(BytesView nonce, std::uint64_t cost, bool sufficient) {
  Encoder e("ppc-balance-statement/1");
  e.put(nonce);
  e.put_u64(cost);
  e.put_u64(sufficient ? 1 : 0);
  return e.bytes();
}

void install_prepaid(World& w, Platform& device, const PrepaidOperator& op, KeyPair group_key,
                     std::uint64_t initial_balance) {
  AccessPolicy honest{{{kBootPcr, w.reference_pcr(device.chain_name)}}};
  device.anchor->create_counter_slot(kBalanceSlot, initial_balance, honest, op.voucher_authority());
  device.anchor->seal_key(kPpcKeySlot, std::move(group_key), honest);
  w.net.annotate("prepaid-install", device.id, {{"initial", std::to_string(initial_balance)}});
}

std::optional<std::string> vsim_logon(World& w, Platform& device, PrepaidOperator& op) {
  if (!chain_measures(device.log, kVsimComponent))
    throw Error(Errc::component_not_measured, device.id + " booted without a VSIM");
  auto candidates = op.pool().imsis;
  std::size_t attempts = 0;
  while (!candidates.empty()) {
    auto idx = w.rng.uniform(candidates.size());
    auto imsi = candidates[idx];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(idx));
    ++attempts;
    auto m = send(w, device.id, op.id(), kMobileChannel, "vsim-logon", {field("imsi", Label::identity, imsi)}, false);
    if (!m) return std::nullopt;
    const auto& asked = m->get("imsi");
    bool ok = op.in_pool(asked) && !op.active(asked);
    send(w, op.id(), device.id, kMobileChannel, "logon-result",
         {field("imsi", Label::identity, asked), field("status", Label::plumbing, ok ? "granted" : "busy")}, false);
    if (ok) {
      op.activate(asked);
      w.net.annotate("vsim-session", op.id(),
                     {{"device", device.id}, {"imsi", asked}, {"attempts", std::to_string(attempts)}});
      return asked;
    }
  }
  w.net.annotate("logon-failed", device.id, {{"reason", std::string(to_string(Errc::pool_exhausted))}});
  return std::nullopt;
}

PrepaidOutcome prepaid_service_request(World& w, Platform& device, PrepaidOperator& op, const std::string& pca,
                                       const std::string& service, std::uint64_t units) {
  const auto cost = op.cost(service, units);
  AttestationRequest req;
  req.verifier = op.id();
  req.pca = pca;
  req.channel = kMobileChannel;
  req.purpose = "prepaid";
  req.encrypted = true;
  req.extra = [&](const Bytes& nonce) {
    std::vector<sim::Field> f{field("service", Label::plumbing, service),
                              field("units", Label::plumbing, std::to_string(units))};
    // The ppC only answers in the measured state it was sealed to.
    try {
      bool sufficient = device.anchor->slot_read(kBalanceSlot) >= cost;
      auto sig = device.anchor->sealed_sign(kPpcKeySlot, balance_statement_tbs(nonce, cost, sufficient));
      f.push_back(field("cost", Label::price, std::to_string(cost)));
      f.push_back(field("sufficient", Label::balance, sufficient ? "true" : "false"));
      f.push_back(field("statement_signature", Label::plumbing, codec::encode(sig)));
    } catch (const Error& e) {
      if (e.code() != Errc::sealed_against_state) throw;
    }
    return f;
  };
  auto out = attest(w, device, req);
  if (!out.response) return PrepaidOutcome::attestation_rejected;

  auto deny = [&](PrepaidOutcome why) {
    send(w, op.id(), device.id, kMobileChannel, "service-denied",
         {field("reason", Label::plumbing, std::string(to_string(why)))}, true);
    w.net.annotate("service-denied", op.id(),
                   {{"device", device.id}, {"reason", std::string(to_string(why))}, {"cost", std::to_string(cost)}});
    return why;
  };
  if (!out.verdict.accepted) return deny(PrepaidOutcome::attestation_rejected);
  const auto& r = *out.response;
  if (!r.has("statement_signature") || !r.has("sufficient") || !r.has("cost"))
    return deny(PrepaidOutcome::bad_statement);
  // The operator prices the request itself and checks the statement against it.
  auto nonce = codec::decode_quote(r.get("quote")).nonce;
  bool sufficient = r.get("sufficient") == "true";
  auto priced = op.cost(r.get("service"), codec::decode_u64(r.get("units")));
  if (codec::decode_u64(r.get("cost")) != priced ||
      !verify(op.group_key(), balance_statement_tbs(nonce, priced, sufficient),
              codec::decode_signature(r.get("statement_signature"))))
    return deny(PrepaidOutcome::bad_statement);
  if (!sufficient) return deny(PrepaidOutcome::insufficient_balance);

  auto grant = send(w, op.id(), device.id, kMobileChannel, "service-grant",
                    {field("service", Label::plumbing, r.get("service")), field("cost", Label::price, std::to_string(priced))},
                    true);
  w.net.annotate("grant", op.id(), {{"device", device.id}, {"service", r.get("service")}, {"cost", std::to_string(priced)}});
  if (!grant) return PrepaidOutcome::granted;
  auto charged = codec::decode_u64(grant->get("cost"));
  auto balance = device.anchor->slot_decrement(kBalanceSlot, charged);
  w.net.annotate("balance", device.id,
                 {{"balance", std::to_string(balance)}, {"change", "-" + std::to_string(charged)}, {"cause", "grant"}});
  return PrepaidOutcome::granted;
}

std::optional<std::uint64_t> redeem_again(World& w, Platform& device, const std::string& op_id, const Voucher& v) {
  auto m = send(w, op_id, device.id, kMobileChannel, "voucher", {field("voucher", Label::balance, codec::encode(v))},
                true);
  if (!m) return std::nullopt;
  auto voucher = codec::decode_voucher(m->get("voucher"));
  try {
    auto balance = device.anchor->slot_redeem(kBalanceSlot, voucher);
    w.net.annotate("balance", device.id,
                   {{"balance", std::to_string(balance)},
                    {"change", "+" + std::to_string(voucher.value)},
                    {"cause", "top-up"},
                    {"voucher", voucher.id}});
    return balance;
  } catch (const Error& e) {
    w.net.annotate("top-up-rejected", device.id, {{"voucher", voucher.id}, {"reason", std::string(to_string(e.code()))}});
    return std::nullopt;
  }
}

TopUpResult top_up(World& w, Platform& device, PrepaidOperator& op, std::uint64_t value) {
  TopUpResult out{op.issue_voucher(value), std::nullopt};
  out.balance = redeem_again(w, device, op.id(), out.voucher);
  return out;
}

}  // namespace tcsim
