#include <algorithm>
#include <functional>

#include "tcsim/error.hpp"
#include "tcsim/protocol.hpp"
#include "tcsim/scenarios.hpp"

namespace tcsim {

using nlohmann::json;
using sim::Event;
using sim::Label;
using sim::Message;
using sim::Transcript;

namespace {

// Everything an assertion may look at: the transcript and what the header
// says about the run.
struct View {
  const Transcript& t;
  json config;
  json script;
  std::vector<std::string> attacks;
  std::map<std::string, std::string> roles;

  explicit View(const Transcript& tr) : t(tr), roles(tr.roster()) {
    config = t.header.value("config", json::object());
    script = t.header.value("script", json::object());
    for (const auto& a : t.header.value("attacks", json::array())) attacks.push_back(a.get<std::string>());
  }

  bool attacked() const { return !attacks.empty(); }
  bool has_attack(const std::string& a) const { return std::find(attacks.begin(), attacks.end(), a) != attacks.end(); }

  std::vector<std::string> with_role(const std::string& role) const {
    std::vector<std::string> out;
    for (const auto& e : script.value("roster", json::array()))
      if (e.value("role", "") == role) out.push_back(e["id"]);
    return out;
  }
  json roster_entry(const std::string& id) const {
    for (const auto& e : script.value("roster", json::array()))
      if (e.value("id", "") == id) return e;
    return json::object();
  }
  std::string carrier() const {
    auto m = with_role("mno");
    return m.empty() ? "" : m.front();
  }
  std::set<std::string> values(const std::string& party, Label label) const {
    std::set<std::string> out;
    auto it = t.knowledge.find(party);
    if (it == t.knowledge.end()) return out;
    for (const auto& k : it->second)
      if (k.label == label) out.insert(k.value);
    return out;
  }
  std::set<std::string> field_values(const std::string& party, const std::string& name) const {
    std::set<std::string> out;
    auto it = t.knowledge.find(party);
    if (it == t.knowledge.end()) return out;
    for (const auto& k : it->second)
      if (k.field == name) out.insert(k.value);
    return out;
  }
  std::set<std::string> subscribers() const {
    std::set<std::string> out;
    for (const auto& e : script.value("roster", json::array()))
      if (e.contains("subscriber")) out.insert(e["subscriber"].get<std::string>());
    return out;
  }
};

using Outcome = std::pair<bool, std::string>;  // observed, detail

struct Check {
  std::string description;
  // Expected value; nullopt skips the assertion for this run.
  std::function<std::optional<bool>(const View&)> expected;
  std::function<Outcome(const View&)> observe;
};

std::optional<bool> always(const View&) { return true; }
std::optional<bool> honest_only(const View& v) {
  if (v.attacked()) return std::nullopt;
  return true;
}

Outcome ok() { return {true, ""}; }
Outcome fail(std::string why) { return {false, std::move(why)}; }

template <class F>
void for_records(const Transcript& t, F f) {
  for (std::size_t i = 0; i < t.records.size(); ++i) f(i, t.records[i]);
}

const Event* as_event(const sim::Record& r, std::string_view kind) {
  const auto* e = std::get_if<Event>(&r);
  return e && e->kind == kind ? e : nullptr;
}

const Message* as_message(const sim::Record& r, std::string_view kind) {
  const auto* m = std::get_if<Message>(&r);
  return m && m->kind == kind ? m : nullptr;
}

std::uint64_t to_u64(const std::string& s) {
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    return 0;
  }
}

// Feature map text computed straight from the policy JSON.
std::string expected_features(const json& policy, const std::string& location) {
  std::map<std::string, std::string> f;
  const json features = policy.value("features", json::object());
  for (const auto& [k, v] : features.items()) f[k] = v.get<std::string>();
  for (const auto& rule : policy.value("location_rules", json::array())) {
    if (rule.value("cell", "") != location) continue;
    for (const auto& [k, v] : rule["overrides"].items()) f[k] = v.get<std::string>();
    break;
  }
  std::string out;
  for (const auto& [k, v] : f) out += (out.empty() ? "" : ",") + k + "=" + v;
  return out;
}

std::uint64_t goods_total(const json& catalog, const std::string& goods) {
  std::uint64_t total = 0;
  std::size_t pos = 0;
  while (pos <= goods.size()) {
    auto c = goods.find(',', pos);
    auto g = goods.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
    if (catalog.contains(g)) total += catalog[g].get<std::uint64_t>();
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return total;
}

// ---- common ----

Outcome knowledge_sound(const View& v) {
  auto a = sim::audit_knowledge(v.t);
  return a.ok ? ok() : fail(a.problems.front());
}

Outcome channel_separation(const View& v) {
  std::map<std::string, sim::Channel> channels;
  for (const auto& c : v.t.channels()) channels[c.id] = c;
  std::map<std::uint64_t, const Message*> by_id;
  for (const auto* m : v.t.messages()) {
    auto it = channels.find(m->channel);
    if (it == channels.end()) return fail("message " + std::to_string(m->id) + " on undeclared channel");
    by_id[m->id] = m;
  }
  for (const auto& [carrier, view] : v.t.carrier_views) {
    for (const auto& r : view) {
      auto m = by_id.find(r.msg_id);
      if (m == by_id.end()) return fail(carrier + " saw unknown message " + std::to_string(r.msg_id));
      const auto& c = channels[m->second->channel];
      if (c.kind != sim::ChannelKind::mobile_network || c.carrier != carrier)
        return fail(carrier + " saw message " + std::to_string(r.msg_id) + " off its network");
    }
  }
  return ok();
}

Outcome labels_fixed(const View& v) {
  std::map<std::string, Label> label_of;
  for (const auto* m : v.t.messages())
    for (const auto& f : m->fields) {
      auto [it, fresh] = label_of.emplace(f.name, f.label);
      if (!fresh && it->second != f.label)
        return fail("field " + f.name + " carried as " + std::string(to_string(it->second)) + " and " +
                    std::string(to_string(f.label)));
    }
  for (const auto& [party, ks] : v.t.knowledge)
    for (const auto& k : ks) {
      auto it = label_of.find(k.field);
      if (it == label_of.end() || it->second != k.label)
        return fail(party + " knows " + k.field + " under a label no message used");
    }
  return ok();
}

std::optional<bool> if_attacked(const View& v) {
  if (!v.attacked()) return std::nullopt;
  return true;
}

Outcome attack_detected(const View& v) {
  for (const auto& a : v.attacks) {
    if (auto g = generic_attack_from_string(a)) {
      const Event* last = nullptr;
      for (const auto* e : v.t.events_of_kind("attestation"))
        if (e->attr("attack") == a) last = e;
      if (!last) return fail(a + " never reached a verifier");
      auto want = std::string(to_string(expected_reason(*g)));
      if (last->attr("accepted") != "false" || last->attr("reasons") != want)
        return fail(a + " gave " + last->attr("reasons") + ", expected " + want);
      if (v.t.events_of_kind("halted").empty()) return fail(a + " did not halt the run");
    } else if (a == "strip-ack" || a == "reuse-token") {
      auto reason = a == "strip-ack" ? "bad-ack-signature" : "token-reused";
      bool seen = false;
      for (const auto* e : v.t.events_of_kind("abort")) seen = seen || e->attr("reason") == reason;
      if (!seen) return fail(a + " was not refused");
    }
  }
  return ok();
}

Outcome no_double_accept(const View& v) {
  std::set<std::string> accepted;
  for (const auto* e : v.t.events_of_kind("attestation")) {
    if (e->attr("accepted") != "true") continue;
    if (!accepted.insert(e->attr("aik")).second) return fail("AIK " + e->attr("aik") + " accepted twice");
  }
  return ok();
}

Outcome ops_completed(const View& v) {
  auto errors = v.t.events_of_kind("op-error");
  if (!errors.empty())
    return fail("op " + errors.front()->attr("op") + " (" + errors.front()->attr("name") + ") failed: " +
                errors.front()->attr("detail"));
  return ok();
}

// ---- one-time AIKs ----

Outcome all_auth_accepted(const View& v) {
  std::uint64_t planned = 0;
  for (const auto& op : v.script.value("events", json::array()))
    if (op.value("op", "") == "authenticate")
      planned += op.value("count", v.config.value("auth_count", std::uint64_t{0}));
  std::uint64_t seen = 0;
  for (const auto* e : v.t.events_of_kind("attestation")) {
    if (e->attr("purpose") != "auth") continue;
    ++seen;
    if (e->attr("accepted") != "true") return fail("authentication rejected: " + e->attr("reasons"));
  }
  if (seen != planned) return fail(std::to_string(seen) + " of " + std::to_string(planned) + " authentications ran");
  return ok();
}

Outcome replenish_count(const View& v) {
  auto n = v.config.value("batch_size", std::uint64_t{0});
  if (n < 2) return fail("batch size below 2");
  std::map<std::string, std::uint64_t> used, replenished;
  for (const auto* e : v.t.events_of_kind("attestation")) ++used[e->attr("prover")];
  for (const auto* e : v.t.events_of_kind("replenish")) ++replenished[e->party];
  for (const auto& [device, k] : used) {
    auto want = k / (n - 1);
    if (replenished[device] != want)
      return fail(device + " replenished " + std::to_string(replenished[device]) + " times after " + std::to_string(k) +
                  " uses, expected " + std::to_string(want));
  }
  return ok();
}

Outcome tokens_unlinkable(const View& v) {
  std::set<std::string> aiks;
  for (const auto* e : v.t.events_of_kind("attestation"))
    if (e->attr("attack").empty() && !aiks.insert(e->attr("aik")).second)
      return fail("AIK " + e->attr("aik") + " presented twice");
  auto services = v.with_role("service");
  for (std::size_t i = 0; i < services.size(); ++i)
    for (std::size_t j = i + 1; j < services.size(); ++j) {
      auto a = v.field_values(services[i], "certificate");
      auto b = v.field_values(services[j], "certificate");
      for (const auto& c : a)
        if (b.count(c)) return fail(services[i] + " and " + services[j] + " share a certificate");
      auto ia = v.values(services[i], Label::identity);
      for (const auto& x : v.values(services[j], Label::identity))
        if (ia.count(x)) return fail(services[i] + " and " + services[j] + " share an identity");
    }
  return ok();
}

// ---- domain restriction ----

struct AdmissionRequest {
  std::string device;
  std::string identity;
  std::string fingerprint;
  bool accepted = false;
  std::string recorded;
  std::set<std::pair<std::string, std::string>> bindings;  // at request time
};

std::vector<AdmissionRequest> admission_requests(const View& v) {
  std::vector<AdmissionRequest> out;
  std::set<std::pair<std::string, std::string>> bindings;
  std::map<std::string, bool> last_subdomain_attestation;
  for_records(v.t, [&](std::size_t, const sim::Record& r) {
    if (const auto* e = as_event(r, "binding")) bindings.insert({e->attr("identity"), e->attr("fingerprint")});
    if (const auto* e = as_event(r, "attestation"); e && e->attr("purpose") == "subdomain")
      last_subdomain_attestation[e->attr("prover")] = e->attr("accepted") == "true";
    if (const auto* e = as_event(r, "subdomain-admission")) {
      AdmissionRequest a{e->attr("device"), e->attr("identity"), e->attr("fingerprint"),
                         last_subdomain_attestation[e->attr("device")], e->attr("result"), bindings};
      out.push_back(std::move(a));
    }
  });
  return out;
}

// Independent statement of the admission rule; returns the result per request.
std::vector<std::string> replay_admissions(const std::vector<AdmissionRequest>& reqs, bool bound) {
  std::map<std::string, std::string> admitted;
  std::vector<std::string> out;
  for (const auto& r : reqs) {
    std::string res;
    if (!r.accepted)
      res = "attestation-failed";
    else if (bound && !r.bindings.count({r.identity, r.fingerprint}))
      res = "credential-inconsistency";
    else if (admitted.count(r.identity) && admitted[r.identity] != r.fingerprint)
      res = "clone-conflict";
    else
      res = "admitted";
    if (res == "admitted") admitted.emplace(r.identity, r.fingerprint);
    out.push_back(res);
  }
  return out;
}

bool is_clone(const View& v, const std::string& device) { return v.roster_entry(device).contains("clone_of"); }

Outcome clone_resilience(const View& v) {
  auto reqs = admission_requests(v);
  if (reqs.empty()) return fail("no sub-domain requests");
  bool bound = v.config.value("registry_mode", "bound") == "bound";
  std::map<std::string, std::vector<std::string>> admitted;  // identity -> devices
  std::map<std::string, std::string> first_accepted;
  for (const auto& r : reqs) {
    if (r.accepted && !first_accepted.count(r.identity)) first_accepted[r.identity] = r.device;
    if (r.recorded == "admitted") admitted[r.identity].push_back(r.device);
  }
  for (const auto& r : reqs) {
    const auto& a = admitted[r.identity];
    if (bound) {
      for (const auto& d : a)
        if (is_clone(v, d)) return fail("clone " + d + " admitted in bound mode");
    } else {
      if (a.size() != 1) return fail(std::to_string(a.size()) + " devices admitted for " + r.identity);
      if (a.front() != first_accepted[r.identity]) return fail("admitted device was not the first requester");
    }
  }
  return ok();
}

Outcome restriction_sound(const View& v) {
  auto reqs = admission_requests(v);
  bool bound = v.config.value("registry_mode", "bound") == "bound";
  auto want = replay_admissions(reqs, bound);
  std::map<std::string, bool> admitted_device;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    if (reqs[i].recorded != want[i])
      return fail(reqs[i].device + " got " + reqs[i].recorded + ", rule says " + want[i]);
    if (want[i] == "admitted") admitted_device[reqs[i].device] = true;
  }
  for (const auto* e : v.t.events_of_kind("subdomain-service")) {
    bool granted = e->attr("granted") == "true";
    if (granted != admitted_device[e->attr("device")])
      return fail("service decision for " + e->attr("device") + " disagrees with admission");
  }
  return ok();
}

Outcome bound_dominates(const View& v) {
  auto reqs = admission_requests(v);
  auto b = replay_admissions(reqs, true);
  auto u = replay_admissions(reqs, false);
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    if (!is_clone(v, reqs[i].device)) continue;
    if (b[i] == "admitted") return fail("bound mode admits clone " + reqs[i].device);
  }
  std::size_t clones_bound = 0, clones_unbound = 0;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    if (!is_clone(v, reqs[i].device)) continue;
    clones_bound += b[i] == "admitted";
    clones_unbound += u[i] == "admitted";
  }
  if (clones_bound > clones_unbound) return fail("bound mode admits more clones than unbound");
  return ok();
}

bool enforcer_intact(const View& v, const std::string& device) {
  auto e = v.roster_entry(device);
  if (e.contains("tamper") && e["tamper"].value("component", "") == "enforcer") return false;
  const json chains = v.script.value("chains", json::object());
  const json chain = chains.value(e.value("chain", ""), json::array());
  for (const auto& c : chain)
    if (c[0] == "enforcer") return true;
  return false;
}

Outcome policy_location(const View& v) {
  auto events = v.t.events_of_kind("policy-applied");
  if (events.empty()) return fail("no policy was applied");
  const auto& policy = v.config["policy"];
  for (const auto* e : events) {
    auto device = e->attr("device");
    auto want = enforcer_intact(v, device) ? expected_features(policy, e->attr("location")) : "unenforced";
    if (e->attr("features") != want)
      return fail(device + " at " + e->attr("location") + " got " + e->attr("features") + ", expected " + want);
  }
  return ok();
}

// ---- prepaid ----

std::set<std::string> tampered(const View& v) {
  std::set<std::string> out;
  for (const auto& e : v.script.value("roster", json::array()))
    if (e.contains("tamper")) out.insert(e["id"].get<std::string>());
  return out;
}

Outcome anonymity(const View& v) {
  auto mno = v.carrier();
  std::set<std::string> pool;
  for (const auto& i : v.config.value("pool", json::array())) pool.insert(i.get<std::string>());
  for (const auto& id : v.values(mno, Label::identity))
    if (!pool.count(id)) return fail(mno + " learned identity " + id.substr(0, 32));
  if (!v.field_values(mno, "ek_certificate").empty()) return fail(mno + " saw an EK certificate");
  return ok();
}

Outcome conservation(const View& v) {
  std::map<std::string, std::uint64_t> balance;
  std::map<std::string, std::uint64_t> granted, debited;
  for (const auto* e : v.t.events()) {
    if (e->kind == "prepaid-install") balance[e->party] = to_u64(e->attr("initial"));
    if (e->kind == "grant") granted[e->attr("device")] += to_u64(e->attr("cost"));
    if (e->kind != "balance") continue;
    auto change = e->attr("change");
    if (change.empty()) return fail("balance event without change");
    auto amount = to_u64(change.substr(1));
    auto& b = balance[e->party];
    if (change[0] == '-') {
      if (amount > b) return fail(e->party + " went below zero");
      b -= amount;
      debited[e->party] += amount;
    } else {
      b += amount;
    }
    if (to_u64(e->attr("balance")) != b)
      return fail(e->party + " reports " + e->attr("balance") + ", ledger says " + std::to_string(b));
  }
  for (const auto& [device, g] : granted)
    if (debited[device] != g)
      return fail(device + " was granted " + std::to_string(g) + " but debited " + std::to_string(debited[device]));
  return ok();
}

Outcome no_grant_without_attestation(const View& v) {
  std::map<std::string, int> pending;  // device -> 1 accepted attestation not yet used
  for (const auto* e : v.t.events()) {
    if (e->kind == "attestation" && e->attr("purpose") == "prepaid")
      pending[e->attr("prover")] = e->attr("accepted") == "true" ? 1 : 0;
    if (e->kind == "grant") {
      auto d = e->attr("device");
      if (pending[d] != 1) return fail("grant to " + d + " without a fresh accepted attestation");
      pending[d] = 0;
    }
  }
  return ok();
}

Outcome denial_at_zero(const View& v) {
  std::map<std::string, std::uint64_t> balance;
  for (const auto* e : v.t.events()) {
    if (e->kind == "prepaid-install") balance[e->party] = to_u64(e->attr("initial"));
    if (e->kind == "balance") balance[e->party] = to_u64(e->attr("balance"));
    auto cost = to_u64(e->attr("cost"));
    const auto d = e->attr("device");
    if (e->kind == "grant" && cost > balance[d])
      return fail(d + " granted " + std::to_string(cost) + " on balance " + std::to_string(balance[d]));
    if (e->kind == "service-denied" && e->attr("reason") == "insufficient-balance" && cost <= balance[d])
      return fail(d + " denied " + std::to_string(cost) + " on balance " + std::to_string(balance[d]));
  }
  return ok();
}

std::optional<bool> if_tampered(const View& v) {
  if (tampered(v).empty()) return std::nullopt;
  return true;
}

Outcome tamper_no_grant(const View& v) {
  auto bad = tampered(v);
  for (const auto* e : v.t.events_of_kind("grant"))
    if (bad.count(e->attr("device"))) return fail("tampered " + e->attr("device") + " was granted service");
  for (const auto* e : v.t.events_of_kind("balance"))
    if (bad.count(e->party) && e->attr("cause") == "grant") return fail("tampered " + e->party + " was debited");
  return ok();
}

Outcome distinct_imsis(const View& v) {
  std::set<std::string> pool;
  for (const auto& i : v.config.value("pool", json::array())) pool.insert(i.get<std::string>());
  std::set<std::string> seen;
  for (const auto* e : v.t.events_of_kind("vsim-session")) {
    auto imsi = e->attr("imsi");
    if (!pool.count(imsi)) return fail(imsi + " is not a pool IMSI");
    if (!seen.insert(imsi).second) return fail(imsi + " assigned twice");
  }
  return ok();
}

std::optional<bool> if_vouchers(const View& v) {
  for (const auto& op : v.script.value("events", json::array()))
    if (op.value("op", "") == "top_up") return true;
  return std::nullopt;
}

Outcome voucher_one_time(const View& v) {
  std::set<std::string> redeemed;
  for (const auto* e : v.t.events_of_kind("balance")) {
    if (e->attr("cause") != "top-up") continue;
    if (!redeemed.insert(e->attr("voucher")).second) return fail("voucher " + e->attr("voucher") + " redeemed twice");
  }
  std::size_t replays = 0, refused = 0;
  for (const auto& op : v.script.value("events", json::array())) replays += op.value("op", "") == "replay_voucher";
  for (const auto* e : v.t.events_of_kind("top-up-rejected")) refused += e->attr("reason") == "voucher-replay";
  if (!v.attacked() && replays != refused)
    return fail(std::to_string(refused) + " of " + std::to_string(replays) + " replays refused");
  return ok();
}

// ---- POS ----

std::optional<bool> if_flow(const View& v, const std::string& flow) {
  for (const auto& op : v.script.value("events", json::array()))
    if (op.value("op", "") == "purchase" && op.value("flow", "") == flow) return true;
  return std::nullopt;
}

Outcome fig4_sequence(const View& v) {
  std::vector<std::string> want{"1", "2"};
  if (v.config.value("vendor_notify", true)) want.push_back("3");
  if (v.config.value("payment_notify", true)) want.push_back("4");
  for (const auto* s : {"5", "6", "7"}) want.push_back(s);
  std::map<std::string, std::vector<std::string>> steps;
  for (const auto* e : v.t.events_of_kind("fig4-step")) steps[e->attr("order")].push_back(e->attr("step"));
  std::set<std::string> aborted;
  for (const auto* e : v.t.events_of_kind("abort")) aborted.insert(e->attr("order"));
  bool any = false;
  for (const auto* e : v.t.events_of_kind("delivery")) {
    if (e->attr("flow") != "fig4") continue;
    any = true;
    if (steps[e->attr("order")] != want) return fail(e->attr("order") + " ran steps out of order");
  }
  for (const auto& [order, s] : steps) {
    if (aborted.count(order)) continue;
    if (s != want) return fail(order + " neither completed nor aborted");
  }
  if (!any && !v.attacked()) return fail("no purchase completed");
  return ok();
}

Outcome delivery_after_confirmation(const View& v) {
  std::set<std::string> acked_to_device, acked_to_pos, token_ok;
  bool charged_since_token = false;
  bool any = false;
  Outcome out = ok();
  for_records(v.t, [&](std::size_t, const sim::Record& r) {
    if (!out.first) return;
    if (const auto* m = as_message(r, "purchase-ack"); m && m->has("order_id")) {
      if (v.roles.count(m->receiver) && v.roles.at(m->receiver) == "pos")
        acked_to_pos.insert(m->get("order_id"));
      else if (v.roles.count(m->sender) && v.roles.at(m->sender) == "mno")
        acked_to_device.insert(m->get("order_id"));
    }
    if (const auto* e = as_event(r, "token-validated")) {
      charged_since_token = false;
      if (e->attr("status") == "ok") token_ok.insert(e->attr("order"));
    }
    if (const auto* e = as_event(r, "charge")) charged_since_token = e->attr("status") == "charged";
    if (const auto* e = as_event(r, "delivery")) {
      any = true;
      auto order = e->attr("order");
      if (e->attr("flow") == "fig4") {
        if (!acked_to_device.count(order) || !acked_to_pos.count(order))
          out = fail(order + " delivered before the operator's acknowledgement");
      } else if (!token_ok.count(order) || !charged_since_token) {
        out = fail(order + " delivered before token and charge were confirmed");
      }
    }
  });
  if (out.first && !any && !v.attacked()) return fail("no delivery happened");
  return out;
}

std::optional<bool> expect_encryption(const View& v) { return v.config.value("encryption", true); }

Outcome mno_good_blind(const View& v) {
  auto goods = v.values(v.carrier(), Label::good);
  if (!goods.empty()) return fail(v.carrier() + " learned goods " + *goods.begin());
  return ok();
}

Outcome carrier_blind(const View& v) {
  std::map<std::uint64_t, const Message*> by_id;
  for (const auto* m : v.t.messages()) by_id[m->id] = m;
  for (const auto& [carrier, view] : v.t.carrier_views)
    for (const auto& r : view) {
      const auto* m = by_id[r.msg_id];
      bool sensitive = false;
      for (const auto& f : m->fields) sensitive = sensitive || f.label == Label::good || f.label == Label::price;
      if (sensitive && !r.field_names.empty()) return fail(carrier + " saw the fields of " + m->kind);
    }
  for (const auto& c : v.t.channels()) {
    if (c.carrier.empty()) continue;
    for (const auto* m : v.t.messages())
      if (m->channel == c.id && m->sender != c.carrier && m->receiver != c.carrier)
        for (const auto& f : m->fields)
          if (f.label == Label::good && v.values(c.carrier, Label::good).count(f.value))
            return fail(c.carrier + " learned goods in transit");
  }
  return ok();
}

std::optional<bool> if_pos_sessions(const View& v) {
  if (v.t.events_of_kind("channel-up").size() < 2 && !v.attacked()) return std::nullopt;
  if (v.attacked() && v.t.events_of_kind("channel-up").size() < 2) return std::nullopt;
  return true;
}

Outcome pos_pseudonyms_distinct(const View& v) {
  std::set<std::string> seen;
  for (const auto* e : v.t.events_of_kind("channel-up"))
    if (!seen.insert(e->attr("pos_pseudonym")).second) return fail("POS pseudonym reused");
  return ok();
}

std::optional<bool> expect_pos_hidden(const View& v) { return !v.config.value("mno_pos_check", false); }

Outcome pos_identity_hidden(const View& v) {
  auto ids = v.values(v.carrier(), Label::identity);
  for (const auto& pos : v.with_role("pos"))
    if (ids.count(pos)) return fail(v.carrier() + " learned POS identity " + pos);
  return ok();
}

std::optional<bool> if_attack(const View& v, const std::string& a) {
  if (!v.has_attack(a)) return std::nullopt;
  return true;
}

Outcome strip_ack_refused(const View& v) {
  std::set<std::string> relayed;
  for (const auto* e : v.t.events_of_kind("fig4-step"))
    if (e->attr("step") == "6") relayed.insert(e->attr("order"));
  if (relayed.empty()) return fail("no acknowledgement was relayed");
  std::set<std::string> refused;
  for (const auto* e : v.t.events_of_kind("abort"))
    if (e->attr("step") == "7" && e->attr("reason") == "bad-ack-signature") refused.insert(e->attr("order"));
  for (const auto* e : v.t.events_of_kind("delivery"))
    if (relayed.count(e->attr("order"))) return fail(e->attr("order") + " delivered on a stripped acknowledgement");
  if (refused != relayed) return fail("not every stripped acknowledgement was refused");
  return ok();
}

std::optional<bool> if_role(const View& v, const std::string& role) {
  if (v.with_role(role).empty()) return std::nullopt;
  return true;
}

Outcome charging_provider_blind(const View& v) {
  for (const auto& cp : v.with_role("charging_provider")) {
    if (!v.values(cp, Label::good).empty()) return fail(cp + " learned goods");
    if (!v.values(cp, Label::identity).empty()) return fail(cp + " learned an identity");
  }
  return ok();
}

// Values that identify the customer: subscriber ids and identity fields the
// devices themselves sent.
std::set<std::string> customer_identity(const View& v) {
  auto out = v.subscribers();
  for (const auto* m : v.t.messages())
    if (v.roles.count(m->sender) && v.roles.at(m->sender) == "device")
      for (const auto& f : m->fields)
        if (f.label == Label::identity) out.insert(f.value);
  return out;
}

Outcome pos_owner_customer_blind(const View& v) {
  auto customer = customer_identity(v);
  for (const auto& owner : v.with_role("pos_owner"))
    for (const auto& id : v.values(owner, Label::identity))
      if (customer.count(id)) return fail(owner + " learned a customer identity");
  return ok();
}

std::string auth_provider_of(const View& v) {
  auto configured = v.config.value("auth_provider", "");
  if (!configured.empty()) return configured;
  auto ap = v.with_role("auth_provider");
  return ap.empty() ? "" : ap.front();
}

std::optional<bool> expect_auth_blind(const View& v) {
  auto ap = auth_provider_of(v);
  if (ap.empty()) return std::nullopt;
  bool merged = v.roles.count(ap) && v.roles.at(ap) == "mno";
  // Linkage only shows once a token has been checked; halted runs never get there.
  if (merged && v.attacked()) return std::nullopt;
  return !merged;
}

Outcome auth_provider_subscriber_blind(const View& v) {
  auto ap = auth_provider_of(v);
  auto subs = v.subscribers();
  bool knows_subscriber = false;
  for (const auto& id : v.values(ap, Label::identity)) knows_subscriber = knows_subscriber || subs.count(id);
  auto tokens = v.field_values(ap, "auth_token");
  for (const auto& c : v.field_values(ap, "certificates")) tokens.insert(c);
  if (knows_subscriber && !tokens.empty()) return fail(ap + " can link tokens to the subscriber");
  return ok();
}

Outcome billing_package_exact(const View& v) {
  const std::set<std::string> want{"auth_token", "grand_total", "signature"};
  const auto& catalog = v.config.value("goods", json::object());
  std::string goods;
  bool any = false;
  Outcome out = ok();
  for_records(v.t, [&](std::size_t, const sim::Record& r) {
    if (!out.first) return;
    if (const auto* m = as_message(r, "auth-token"); m && m->has("goods")) goods = m->get("goods");
    if (const auto* m = as_message(r, "billing-package")) {
      any = true;
      if (m->field_names() != want) out = fail("billing package carries extra or missing fields");
      else if (to_u64(m->get("grand_total")) != goods_total(catalog, goods))
        out = fail("billing total " + m->get("grand_total") + " does not match the goods");
    }
  });
  if (out.first && !any && !v.attacked()) return fail("no billing package was sent");
  return out;
}

Outcome reuse_token_aborted(const View& v) {
  std::set<std::string> reused;
  for (const auto* e : v.t.events_of_kind("attack"))
    if (e->attr("name") == "reuse-token") reused.insert(e->attr("order"));
  if (reused.empty()) return fail("no token was replayed");
  std::set<std::string> aborted;
  for (const auto* e : v.t.events_of_kind("abort"))
    if (e->attr("step") == "ii" && e->attr("reason") == "token-reused") aborted.insert(e->attr("order"));
  for (const auto* e : v.t.events_of_kind("delivery"))
    if (reused.count(e->attr("order"))) return fail(e->attr("order") + " delivered on a replayed token");
  if (aborted != reused) return fail("replayed token not refused at step ii");
  return ok();
}

// ---- facility ----

std::optional<bool> if_facility(const View& v) {
  if (v.t.events_of_kind("entry").empty() && v.t.events_of_kind("enforcer-filtered").empty()) return std::nullopt;
  return true;
}

Outcome enforcer_sound(const View& v) {
  std::map<std::string, const Event*> last;  // device -> latest entry attestation
  Outcome out = ok();
  for_records(v.t, [&](std::size_t, const sim::Record& r) {
    if (!out.first) return;
    if (const auto* e = as_event(r, "attestation"); e && e->attr("purpose") == "entry") last[e->attr("prover")] = e;
    if (const auto* e = as_event(r, "entry"); e && e->attr("granted") == "true") {
      auto d = e->attr("device");
      if (!last.count(d) || last[d]->attr("accepted") != "true") out = fail(d + " entered without attestation");
      else if (!enforcer_intact(v, d)) out = fail(d + " entered without an intact enforcer");
    }
  });
  if (!out.first) return out;
  for (const auto& ext : v.with_role("external_provider")) {
    if (!v.values(ext, Label::identity).empty()) return fail(ext + " learned an identity");
    if (!v.field_values(ext, "attendees").empty()) return fail(ext + " received the attendee list");
  }
  return ok();
}

Outcome gate_logging(const View& v) {
  std::vector<std::pair<std::string, std::string>> gate_events, logged;
  for_records(v.t, [&](std::size_t, const sim::Record& r) {
    if (const auto* e = as_event(r, "entry")) gate_events.emplace_back(e->attr("device"), "entry");
    if (const auto* e = as_event(r, "exit")) gate_events.emplace_back(e->attr("device"), "exit");
    if (const auto* m = as_message(r, "gate-log")) logged.emplace_back(m->get("device"), m->get("action"));
  });
  if (gate_events != logged) return fail("gate log does not match entries and exits");
  return ok();
}

Outcome zone_policy(const View& v, bool on_exit) {
  std::map<std::string, std::string> awaiting;  // device -> location of the next policy
  const auto& policy = v.config["policy"];
  Outcome out = ok();
  bool any = false;
  for_records(v.t, [&](std::size_t, const sim::Record& r) {
    if (!out.first) return;
    if (!on_exit)
      if (const auto* e = as_event(r, "entry"); e && e->attr("granted") == "true") awaiting[e->attr("device")] = e->attr("zone");
    if (on_exit)
      if (const auto* e = as_event(r, "exit")) awaiting[e->attr("device")] = "outside";
    if (const auto* e = as_event(r, "policy-applied")) {
      auto d = e->attr("device");
      if (!awaiting.count(d)) return;
      any = true;
      auto want = expected_features(policy, awaiting[d]);
      if (e->attr("location") != awaiting[d] || e->attr("features") != want)
        out = fail(d + " got " + e->attr("features") + " at " + e->attr("location") + ", expected " + want);
      awaiting.erase(d);
    }
  });
  if (out.first && !awaiting.empty()) return fail(awaiting.begin()->first + " never received its policy");
  if (out.first && !any && !v.attacked()) return fail("no policy followed a gate event");
  return out;
}

std::optional<bool> if_exits(const View& v) {
  if (v.t.events_of_kind("exit").empty() && v.attacked()) return std::nullopt;
  for (const auto& op : v.script.value("events", json::array()))
    if (op.value("op", "") == "exit") return true;
  return std::nullopt;
}

// ---- generic ----

std::optional<bool> if_expectations(const View& v) {
  // Counts are written for the script's own config.
  if (v.attacked() || !v.script.contains("expect_events") || !v.t.header.value("variants", json::array()).empty())
    return std::nullopt;
  return true;
}

Outcome expected_events(const View& v) {
  for (const auto& want : v.script["expect_events"]) {
    std::uint64_t n = 0;
    for (const auto* e : v.t.events_of_kind(want["kind"].get<std::string>())) {
      bool match = true;
      const json attrs = want.value("attrs", json::object());
      for (const auto& [k, val] : attrs.items()) match = match && e->attr(k) == val;
      n += match;
    }
    if (n != want["count"].get<std::uint64_t>())
      return fail(std::to_string(n) + " " + want["kind"].get<std::string>() + " events, expected " +
                  std::to_string(want["count"].get<std::uint64_t>()));
  }
  return ok();
}

const std::map<std::string, Check>& registry() {
  static const std::map<std::string, Check> r{
      {"knowledge-sound", {"knowledge sets and carrier views follow from the messages", always, knowledge_sound}},
      {"channel-separation", {"carriers see only traffic on their own mobile channel", always, channel_separation}},
      {"labels-fixed", {"each field keeps one sensitivity label throughout", always, labels_fixed}},
      {"attack-detected", {"every injected attack is refused with its exact reason", if_attacked, attack_detected}},
      {"no-double-accept", {"no AIK is accepted twice", always, no_double_accept}},
      {"ops-completed", {"every scripted operation ran without a protocol error", always, ops_completed}},
      {"all-auth-accepted", {"every planned authentication ran and was accepted", honest_only, all_auth_accepted}},
      {"replenish-count", {"replenishments equal floor(uses / (batch - 1)) per device", honest_only, replenish_count}},
      {"tokens-unlinkable", {"services never see the same certificate or identity", always, tokens_unlinkable}},
      {"clone-resilience",
       {"bound mode admits no clone; unbound admits exactly the first requester", honest_only, clone_resilience}},
      {"restriction-sound", {"admission results follow the registry rule", always, restriction_sound}},
      {"bound-dominates", {"bound mode never admits a clone that unbound mode rejects", always, bound_dominates}},
      {"policy-location", {"applied feature maps match the policy for the location", honest_only, policy_location}},
      {"anonymity", {"the operator learns only pool IMSIs", always, anonymity}},
      {"conservation", {"balances equal initial plus top-ups minus grants", always, conservation}},
      {"no-grant-without-attestation",
       {"each grant follows a fresh accepted attestation", always, no_grant_without_attestation}},
      {"denial-at-zero", {"requests above the balance are denied and only those", always, denial_at_zero}},
      {"tamper-no-grant", {"tampered clients get no service and no debit", if_tampered, tamper_no_grant}},
      {"distinct-imsis", {"concurrent sessions hold distinct pool IMSIs", always, distinct_imsis}},
      {"voucher-one-time", {"each voucher credits at most once", if_vouchers, voucher_one_time}},
      {"fig4-sequence",
       {"purchases run the seven steps in order", [](const View& v) { return if_flow(v, "fig4"); }, fig4_sequence}},
      {"delivery-after-confirmation",
       {"goods are released only after confirmation", [](const View& v) -> std::optional<bool> {
          if (!if_flow(v, "fig4") && !if_flow(v, "sep-duties")) return std::nullopt;
          return true;
        },
        delivery_after_confirmation}},
      {"mno-good-blind", {"the operator never learns the goods", expect_encryption, mno_good_blind}},
      {"carrier-blind", {"the carrier sees no goods or prices in transit", expect_encryption, carrier_blind}},
      {"pos-pseudonyms-distinct", {"each session shows a fresh POS pseudonym", if_pos_sessions, pos_pseudonyms_distinct}},
      {"pos-identity-hidden-from-mno", {"the operator never learns which POS", expect_pos_hidden, pos_identity_hidden}},
      {"strip-ack-refused",
       {"a stripped acknowledgement blocks delivery", [](const View& v) { return if_attack(v, "strip-ack"); },
        strip_ack_refused}},
      {"charging-provider-blind",
       {"the charging provider sees neither goods nor identities",
        [](const View& v) { return if_role(v, "charging_provider"); }, charging_provider_blind}},
      {"pos-owner-customer-blind",
       {"the POS owner never learns the customer", [](const View& v) { return if_role(v, "pos_owner"); },
        pos_owner_customer_blind}},
      {"auth-provider-subscriber-blind",
       {"the authentication provider cannot link tokens to a subscriber", expect_auth_blind,
        auth_provider_subscriber_blind}},
      {"billing-package-exact",
       {"billing packages hold exactly token, total and signature",
        [](const View& v) { return if_flow(v, "sep-duties"); }, billing_package_exact}},
      {"reuse-token-aborted",
       {"a replayed token aborts the purchase at step ii", [](const View& v) { return if_attack(v, "reuse-token"); },
        reuse_token_aborted}},
      {"enforcer-sound", {"only attested, enforcing devices enter; external parties see no identities", if_facility,
                          enforcer_sound}},
      {"gate-logging", {"every entry and exit is logged to the company", if_facility, gate_logging}},
      {"zone-policy",
       {"entry applies the zone's feature map", if_facility, [](const View& v) { return zone_policy(v, false); }}},
      {"policy-restored",
       {"exit restores the base feature map", if_exits, [](const View& v) { return zone_policy(v, true); }}},
      {"expected-events", {"event counts declared by the script", if_expectations, expected_events}},
  };
  return r;
}

}  // namespace

const std::vector<AssertionInfo>& assertion_catalog() {
  static const std::vector<AssertionInfo> out = [] {
    std::vector<AssertionInfo> v;
    for (const auto& [name, c] : registry()) v.push_back({name, c.description});
    return v;
  }();
  return out;
}

Report check_transcript(const Transcript& t, const std::string& jsonl_sha256) {
  View v(t);
  Report r;
  r.scenario = t.header.value("scenario", "");
  r.seed = t.header.value("seed", std::uint64_t{0});
  r.attacks = v.attacks;
  r.transcript_sha256 = jsonl_sha256;
  for (const auto& n : t.header.value("assertions", json::array())) {
    auto name = n.get<std::string>();
    auto it = registry().find(name);
    if (it == registry().end()) throw Error(Errc::malformed_message, "unknown assertion " + name);
    AssertionResult a;
    a.name = name;
    try {
      a.expected = it->second.expected(v);
      if (a.expected) std::tie(a.observed, a.detail) = it->second.observe(v);
    } catch (const std::exception& e) {
      // A transcript the check cannot interpret fails the check.
      a.expected = a.expected.value_or(true);
      a.observed = !*a.expected;
      a.detail = e.what();
    }
    r.assertions.push_back(std::move(a));
  }
  return r;
}

bool Report::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed(); });
}

json Report::to_json() const {
  json as = json::array();
  for (const auto& a : assertions)
    as.push_back({{"name", a.name},
                  {"expected", a.expected ? json(*a.expected) : json(nullptr)},
                  {"observed", a.observed},
                  {"passed", a.passed()},
                  {"detail", a.detail}});
  return {{"schema", kReportSchema},
          {"scenario", scenario},
          {"seed", seed},
          {"attacks", attacks},
          {"passed", passed()},
          {"transcript_sha256", transcript_sha256},
          {"assertions", as}};
}

Report Report::from_json(const json& j) {
  try {
    if (j.at("schema") != kReportSchema) throw Error(Errc::malformed_message, "not a report");
    Report r;
    r.scenario = j.at("scenario");
    r.seed = j.at("seed");
    r.attacks = j.at("attacks").get<std::vector<std::string>>();
    r.transcript_sha256 = j.at("transcript_sha256");
    for (const auto& a : j.at("assertions")) {
      AssertionResult x;
      x.name = a.at("name");
      if (!a.at("expected").is_null()) x.expected = a.at("expected").get<bool>();
      x.observed = a.at("observed");
      x.detail = a.value("detail", "");
      r.assertions.push_back(std::move(x));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_message, std::string("report: ") + e.what());
  }
}

}  // namespace tcsim
