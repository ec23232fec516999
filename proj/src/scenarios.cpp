#include "tcsim/scenarios.hpp"

#include <algorithm>

#include "tcsim/codec.hpp"
#include "tcsim/domain_restriction.hpp"
#include "tcsim/error.hpp"
#include "tcsim/m2m_pos.hpp"
#include "tcsim/prepaid.hpp"

namespace tcsim {

using nlohmann::json;
using sim::Label;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::config_error, what); }

const std::set<std::string> kRoles{"device",   "pos",  "mno",          "pca",
                                   "service",  "pos_owner",    "vendor",
                                   "payment_provider", "auth_provider", "charging_provider",
                                   "gate",     "company_server", "terminal",
                                   "external_provider", "authority"};
const std::set<std::string> kKinds{"one-time-aik", "clone", "prepaid", "pos", "facility"};

bool same_type(const json& a, const json& b) {
  if (a.is_number_float()) return b.is_number();
  if (a.is_number_integer()) return b.is_number_integer() && (!a.is_number_unsigned() || b.get<std::int64_t>() >= 0);
  return a.type() == b.type();
}

// ---- op argument checks ----

enum class Arg { party, string, count, strings, parties };

struct ArgSpec {
  std::string key;
  Arg kind;
  std::set<std::string> roles;  // for party arguments; empty means any
  bool optional = false;
};

const std::map<std::string, std::vector<ArgSpec>>& op_specs() {
  static const std::set<std::string> kPlatforms{"device", "pos"};
  static const std::map<std::string, std::vector<ArgSpec>> specs{
      {"network_access", {{"device", Arg::party, {"device"}}, {"mno", Arg::party, {"mno"}}}},
      {"enroll", {{"device", Arg::party, kPlatforms}, {"pca", Arg::party, {}}}},
      {"authenticate",
       {{"device", Arg::party, {"device"}},
        {"pca", Arg::party, {}},
        {"services", Arg::parties, {"service"}},
        {"count", Arg::count, {}, true}}},
      {"authority_bind", {{"device", Arg::party, {"device"}}, {"authority", Arg::party, {}}, {"pca", Arg::party, {}}}},
      {"request_subdomain", {{"device", Arg::party, {"device"}}, {"mno", Arg::party, {"mno"}}, {"pca", Arg::party, {}}}},
      {"subdomain_service", {{"device", Arg::party, {"device"}}, {"mno", Arg::party, {"mno"}}}},
      {"apply_policy",
       {{"device", Arg::party, {"device"}},
        {"issuer", Arg::party, {}},
        {"pca", Arg::party, {}},
        {"location", Arg::string, {}}}},
      {"vsim_logon", {{"device", Arg::party, {"device"}}, {"mno", Arg::party, {"mno"}}}},
      {"prepaid_request",
       {{"device", Arg::party, {"device"}},
        {"mno", Arg::party, {"mno"}},
        {"pca", Arg::party, {}},
        {"service", Arg::string, {}},
        {"units", Arg::count, {}}}},
      {"top_up", {{"device", Arg::party, {"device"}}, {"mno", Arg::party, {"mno"}}, {"value", Arg::count, {}}}},
      {"replay_voucher", {{"device", Arg::party, {"device"}}, {"mno", Arg::party, {"mno"}}}},
      {"pos_session", {{"device", Arg::party, {"device"}}, {"pos", Arg::party, {"pos"}}}},
      {"purchase",
       {{"device", Arg::party, {"device"}},
        {"pos", Arg::party, {"pos"}},
        {"flow", Arg::string, {}},
        {"goods", Arg::strings, {}}}},
      {"rotate_pseudonym", {{"pos", Arg::party, {"pos"}}}},
      {"enter",
       {{"device", Arg::party, {"device"}},
        {"gate", Arg::party, {"gate"}},
        {"zone", Arg::string, {}},
        {"pca", Arg::party, {}}}},
      {"exit", {{"device", Arg::party, {"device"}}, {"gate", Arg::party, {"gate"}}}},
      {"terminal",
       {{"device", Arg::party, {"device"}},
        {"terminal", Arg::party, {"terminal"}},
        {"server", Arg::party, {"company_server"}},
        {"request", Arg::string, {}}}},
      {"meeting",
       {{"server", Arg::party, {"company_server"}},
        {"external", Arg::party, {"external_provider"}},
        {"room", Arg::string, {}},
        {"attendees", Arg::strings, {}}}},
      {"idle", {{"ticks", Arg::count, {}}}},
  };
  return specs;
}

void check_op(const json& op, std::size_t i, const std::map<std::string, json>& roster) {
  const auto where = "events[" + std::to_string(i) + "]";
  if (!op.is_object() || !op.contains("op") || !op["op"].is_string()) bad(where + ": needs a string \"op\"");
  auto name = op["op"].get<std::string>();
  auto it = op_specs().find(name);
  if (it == op_specs().end()) bad(where + ": unknown op " + name);
  std::set<std::string> known{"op"};
  for (const auto& a : it->second) {
    known.insert(a.key);
    if (!op.contains(a.key)) {
      if (a.optional) continue;
      bad(where + ": " + name + " needs " + a.key);
    }
    const auto& v = op[a.key];
    auto check_party = [&](const json& p) {
      if (!p.is_string()) bad(where + ": " + a.key + " must name a party");
      auto r = roster.find(p.get<std::string>());
      if (r == roster.end()) bad(where + ": " + a.key + " names unknown party " + p.get<std::string>());
      if (!a.roles.empty() && !a.roles.count(r->second["role"].get<std::string>()))
        bad(where + ": " + a.key + " " + p.get<std::string>() + " has the wrong role");
    };
    switch (a.kind) {
      case Arg::party: check_party(v); break;
      case Arg::string:
        if (!v.is_string() || v.get<std::string>().empty()) bad(where + ": " + a.key + " must be a non-empty string");
        break;
      case Arg::count:
        if (!v.is_number_unsigned()) bad(where + ": " + a.key + " must be a non-negative integer");
        break;
      case Arg::strings:
      case Arg::parties:
        if (!v.is_array() || v.empty()) bad(where + ": " + a.key + " must be a non-empty list");
        for (const auto& s : v) {
          if (a.kind == Arg::parties)
            check_party(s);
          else if (!s.is_string())
            bad(where + ": " + a.key + " must list strings");
        }
        break;
    }
  }
  for (const auto& [k, _] : op.items())
    if (!known.count(k)) bad(where + ": unexpected key " + k);
  if (name == "purchase") {
    auto flow = op["flow"].get<std::string>();
    if (flow != "fig4" && flow != "sep-duties") bad(where + ": flow must be fig4 or sep-duties");
  }
  if ((name == "enroll" || name == "authenticate" || name == "authority_bind" || name == "request_subdomain" ||
       name == "apply_policy" || name == "prepaid_request" || name == "enter") &&
      !roster.at(op["pca"].get<std::string>()).contains("pca_domain"))
    bad(where + ": " + op["pca"].get<std::string>() + " is not a PCA");
}

std::vector<BootComponent> chain_from_json(const json& j) {
  std::vector<BootComponent> out;
  for (const auto& c : j) out.push_back({c[0].get<std::string>(), to_bytes(c[1].get<std::string>()), out.size(), {}});
  return out;
}

}  // namespace

// ---- config ----

const json& default_config() {
  static const json d = json::parse(R"({
    "batch_size": 10,
    "validity_ticks": 1000,
    "freshness_window": 10,
    "shared_used_set": true,
    "encryption": true,
    "registry_mode": "bound",
    "billing": "centralised",
    "token_check": "owner",
    "vendor_notify": true,
    "payment_notify": true,
    "mno_pos_check": false,
    "access_check": "online",
    "cache_ticks": 50,
    "initial_balance": 500,
    "tariffs": {"data": 10, "voice": 50, "sms": 5},
    "pool": ["ppimsi-0", "ppimsi-1", "ppimsi-2", "ppimsi-3", "ppimsi-4"],
    "charge_limit": 100000,
    "goods": {"cola": 150, "chips": 120, "water": 90},
    "pos_location": "station-7",
    "policy": {
      "features": {"camera": "enabled", "mms": "enabled", "bluetooth": "enabled"},
      "location_rules": [
        {"cell": "cell-lab", "overrides": {"camera": "disabled"}},
        {"cell": "zone-a", "overrides": {"camera": "disabled", "mms": "disabled"}}
      ]
    },
    "enforcer_allowed": ["room", "power", "start", "end"],
    "auth_count": 27,
    "auth_provider": "",
    "device_pca": ""
  })");
  return d;
}

json merge_config(const json& base, const json& overrides) {
  if (!overrides.is_object()) bad("config must be an object");
  json out = base;
  for (const auto& [k, v] : overrides.items()) {
    if (!base.contains(k)) bad("unknown config key " + k);
    if (!same_type(base[k], v)) bad("config key " + k + " has the wrong type");
    out[k] = v;
  }
  return out;
}

std::pair<std::string, json> parse_variant(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad("variant must look like KEY=VALUE: " + assignment);
  auto key = assignment.substr(0, eq);
  auto text = assignment.substr(eq + 1);
  const auto& d = default_config();
  if (!d.contains(key)) bad("unknown config key " + key);
  const auto& proto = d[key];
  if (proto.is_boolean()) {
    if (text == "true") return {key, true};
    if (text == "false") return {key, false};
    bad(key + " takes true or false");
  }
  if (proto.is_number_unsigned()) {
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
      bad(key + " takes a non-negative integer");
    try {
      return {key, std::stoull(text)};
    } catch (const std::out_of_range&) {
      bad(key + " is out of range");
    }
  }
  if (proto.is_string()) return {key, text};
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded() || !same_type(proto, v)) bad(key + " takes a JSON " + std::string(proto.type_name()));
  return {key, v};
}

namespace {

void validate_config(const json& c) {
  auto one_of = [&](const char* key, std::initializer_list<const char*> allowed) {
    auto v = c[key].get<std::string>();
    for (const auto* a : allowed)
      if (v == a) return;
    bad(std::string(key) + " has unsupported value " + v);
  };
  one_of("registry_mode", {"bound", "unbound"});
  one_of("billing", {"centralised", "decentralised"});
  one_of("token_check", {"owner", "direct"});
  one_of("access_check", {"online", "cache"});
  if (c["batch_size"].get<std::uint64_t>() < 2) bad("batch_size must be at least 2");
  if (c["validity_ticks"].get<std::uint64_t>() == 0) bad("validity_ticks must be positive");
  if (c["pool"].empty()) bad("pool must not be empty");
  for (const auto& i : c["pool"])
    if (!i.is_string()) bad("pool must list strings");
  for (const auto* key : {"tariffs", "goods"})
    for (const auto& [k, v] : c[key].items())
      if (!v.is_number_unsigned()) bad(std::string(key) + "." + k + " must be a non-negative integer");
  for (const auto& s : c["enforcer_allowed"])
    if (!s.is_string()) bad("enforcer_allowed must list strings");
  try {
    parse_feature_policy(c["policy"]);
  } catch (const Error& e) {
    bad(std::string("policy: ") + e.what());
  }
}

}  // namespace

// ---- scripts ----

ScenarioScript parse_script(const json& doc) {
  if (!doc.is_object()) bad("script must be a JSON object");
  if (doc.value("schema", "") != kScriptSchema) bad("script schema must be " + std::string(kScriptSchema));
  for (const auto* key : {"name", "kind"})
    if (!doc.contains(key) || !doc[key].is_string() || doc[key].get<std::string>().empty())
      bad(std::string("script needs a non-empty string ") + key);
  static const std::set<std::string> top{"schema", "name",    "kind",   "description", "chains",
                                         "roster", "config",  "events", "attacks",     "assertions",
                                         "expect_events"};
  for (const auto& [k, _] : doc.items())
    if (!top.count(k)) bad("unexpected script key " + k);
  ScenarioScript s{doc["name"], doc["kind"], doc.value("description", ""), doc};
  if (!kKinds.count(s.kind)) bad("unknown scenario kind " + s.kind);

  const json chains = doc.value("chains", json::object());
  if (!chains.is_object()) bad("chains must be an object");
  for (const auto& [name, c] : chains.items()) {
    if (!c.is_array() || c.empty()) bad("chain " + name + " must be a non-empty list");
    std::set<std::string> seen;
    for (const auto& e : c) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        bad("chain " + name + " entries must be [component, payload]");
      if (!seen.insert(e[0].get<std::string>()).second) bad("chain " + name + " repeats a component");
    }
  }

  if (!doc.contains("roster") || !doc["roster"].is_array() || doc["roster"].empty()) bad("roster must be a non-empty list");
  std::map<std::string, json> roster;
  bool carrier = false;
  static const std::set<std::string> entry_keys{"id", "role", "chain", "subscriber", "clone_of", "pca_domain", "tamper"};
  for (const auto& e : doc["roster"]) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string() || !e.contains("role") || !e["role"].is_string())
      bad("roster entries need string id and role");
    auto id = e["id"].get<std::string>();
    auto role = e["role"].get<std::string>();
    for (const auto& [k, v] : e.items()) {
      if (!entry_keys.count(k)) bad("roster " + id + ": unexpected key " + k);
      if (k != "tamper" && !v.is_string()) bad("roster " + id + ": " + k + " must be a string");
    }
    if (id.empty()) bad("roster ids must be non-empty");
    if (!kRoles.count(role)) bad("roster " + id + ": unknown role " + role);
    if (!roster.emplace(id, e).second) bad("duplicate roster id " + id);
    bool platform = role == "device" || role == "pos";
    if (platform != e.contains("chain")) bad("roster " + id + ": devices and POS terminals, and only they, name a chain");
    if (platform && !chains.contains(e["chain"].get<std::string>()))
      bad("roster " + id + ": unknown chain " + e["chain"].get<std::string>());
    if ((e.contains("subscriber") || e.contains("clone_of")) && role != "device")
      bad("roster " + id + ": only devices carry subscriber credentials");
    if (e.contains("tamper")) {
      const auto& t = e["tamper"];
      if (!platform || !t.is_object() || !t.contains("component") || !t.contains("payload") ||
          !t["component"].is_string() || !t["payload"].is_string())
        bad("roster " + id + ": tamper needs component and payload on a platform");
      bool found = false;
      for (const auto& c : chains[e["chain"].get<std::string>()]) found = found || c[0] == t["component"];
      if (!found) bad("roster " + id + ": tamper names a component outside its chain");
    }
    carrier = carrier || role == "mno";
  }
  if (!carrier) bad("roster needs an mno to carry the mobile channel");
  for (const auto& [id, e] : roster) {
    if (!e.contains("clone_of")) continue;
    auto it = roster.find(e["clone_of"].get<std::string>());
    if (it == roster.end() || it->first == id || it->second.value("subscriber", "") != e.value("subscriber", "") ||
        !e.contains("subscriber"))
      bad("roster " + id + ": clone_of must name a device with the same subscriber");
  }

  if (!doc.contains("events") || !doc["events"].is_array()) bad("events must be a list");
  for (std::size_t i = 0; i < doc["events"].size(); ++i) check_op(doc["events"][i], i, roster);

  if (doc.contains("config")) validate_config(merge_config(default_config(), doc["config"]));
  for (const auto* key : {"attacks", "assertions"}) {
    if (!doc.contains(key)) continue;
    if (!doc[key].is_array()) bad(std::string(key) + " must be a list");
    for (const auto& a : doc[key])
      if (!a.is_string()) bad(std::string(key) + " must list strings");
  }
  for (const auto& a : doc.value("attacks", json::array()))
    if (a != "strip-ack" && a != "reuse-token") bad("unknown scenario attack " + a.get<std::string>());
  std::set<std::string> names;
  for (const auto& a : assertion_catalog()) names.insert(a.name);
  for (const auto& a : doc.value("assertions", json::array()))
    if (!names.count(a.get<std::string>())) bad("unknown assertion " + a.get<std::string>());
  for (const auto& e : doc.value("expect_events", json::array())) {
    if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string() || !e.contains("count") ||
        !e["count"].is_number_unsigned())
      bad("expect_events entries need kind and count");
    if (e.contains("attrs") && !e["attrs"].is_object()) bad("expect_events attrs must be an object");
  }
  return s;
}

std::vector<std::string> supported_attacks(const ScenarioScript& script) {
  std::vector<std::string> out;
  for (auto a : kAllGenericAttacks) out.emplace_back(to_string(a));
  for (const auto& a : script.doc.value("attacks", json::array())) out.push_back(a.get<std::string>());
  return out;
}

// ---- the engine ----

namespace {

struct FacilityDevice {
  std::string zone;
  std::string pca;
};

class Engine {
 public:
  Engine(const ScenarioScript& s, json cfg, std::uint64_t seed, std::optional<GenericAttack> generic,
         std::set<std::string> specific)
      : script_(s),
        cfg_(std::move(cfg)),
        w_(seed, WorldOptions{cfg_["batch_size"].get<std::size_t>(), cfg_["validity_ticks"].get<Tick>(),
                              cfg_["freshness_window"].get<Tick>(), cfg_["shared_used_set"].get<bool>()}),
        specific_(std::move(specific)),
        registry_(*registry_mode_from_string(cfg_["registry_mode"].get<std::string>())),
        policy_(parse_feature_policy(cfg_["policy"])) {
    w_.generic_attack = generic;
    setup();
  }

  void run() {
    std::size_t index = 0;
    for (const auto& op : script_.doc["events"]) {
      try {
        execute(op);
      } catch (const Halted& h) {
        w_.net.annotate("halted", "", {{"reason", h.reason}, {"op", std::to_string(index)}});
        break;
      } catch (const Error& e) {
        w_.net.annotate("op-error", "",
                        {{"op", std::to_string(index)}, {"name", op["op"]}, {"code", std::string(to_string(e.code()))},
                         {"detail", e.what()}});
      }
      ++index;
    }
    w_.net.annotate("run-end", "", {{"ticks", std::to_string(w_.net.now())}});
  }

  World& world() { return w_; }

 private:
  std::string str(const json& op, const char* key) const { return op[key].get<std::string>(); }

  void setup() {
    const auto& doc = script_.doc;
    for (const auto& e : doc["roster"]) {
      auto id = e["id"].get<std::string>();
      auto role = e["role"].get<std::string>();
      w_.add_party(id, role);
      roles_[id] = role;
      if (role == "mno" && carrier_.empty()) carrier_ = id;
      by_role_[role].push_back(id);
    }
    w_.add_channels(carrier_);
    const json chains = doc.value("chains", json::object());
    for (const auto& [name, c] : chains.items()) w_.register_chain(name, chain_from_json(c));
    for (const auto& e : doc["roster"])
      if (e.contains("pca_domain")) w_.add_pca(e["id"], e["pca_domain"]);
    for (const auto& id : by_role_["mno"]) mnos_.emplace(id, Mno(id));

    bool prepaid = false;
    for (const auto& e : doc["roster"]) {
      if (!e.contains("chain")) continue;
      auto& p = w_.add_platform(e["id"], e["chain"]);
      if (e.contains("tamper"))
        p.boot_chain(tamper(p.chain, e["tamper"]["component"], to_bytes(e["tamper"]["payload"].get<std::string>())));
      if (e.contains("subscriber")) {
        auto imsi = e["subscriber"].get<std::string>();
        const auto& key = w_.party_key("subscriber:" + imsi);
        credentials_.emplace(p.id, GenericCredential{imsi, carrier_, key});
        mnos_.at(carrier_).add_subscriber(imsi, key.public_key());
      }
      for (const auto& c : w_.chain(p.chain_name)) prepaid = prepaid || c.name == kPpcComponent;
    }

    if (prepaid) {
      PpImsiPool pool{cfg_["pool"].get<std::vector<std::string>>(), carrier_};
      prepaid_.emplace(carrier_, pool, cfg_["tariffs"].get<std::map<std::string, std::uint64_t>>(),
                       w_.party_key(carrier_ + ":voucher"), w_.party_key("ppc-group").public_key());
      for (const auto& e : doc["roster"]) {
        if (!e.contains("chain")) continue;
        bool has_ppc = false;
        for (const auto& c : w_.chain(e["chain"])) has_ppc = has_ppc || c.name == kPpcComponent;
        if (has_ppc)
          install_prepaid(w_, w_.platform(e["id"]), *prepaid_, w_.party_key("ppc-group"),
                          cfg_["initial_balance"].get<std::uint64_t>());
      }
    }

    pos_state_.catalog = cfg_["goods"].get<std::map<std::string, std::uint64_t>>();
    pos_state_.location = cfg_["pos_location"].get<std::string>();
  }

  const std::string& first(const std::string& role, const std::string& needed_by) {
    auto it = by_role_.find(role);
    if (it == by_role_.end() || it->second.empty()) bad(needed_by + " needs a party with role " + role);
    return it->second.front();
  }

  std::string company_of() { return first("company_server", "facility access"); }

  enum class PosUse { session, fig4, sep };

  PosParties pos_parties(const json& op, PosUse use) {
    PosParties p;
    p.device = str(op, "device");
    p.pos = str(op, "pos");
    p.mno = carrier_;
    p.pos_owner = first("pos_owner", "a purchase");
    p.pos_pca = p.pos_owner;
    auto configured = cfg_["auth_provider"].get<std::string>();
    if (!configured.empty()) {
      if (!roles_.count(configured)) bad("auth_provider names unknown party " + configured);
      p.auth_provider = configured;
    } else if (by_role_.count("auth_provider")) {
      p.auth_provider = by_role_["auth_provider"].front();
    }
    auto dp = cfg_["device_pca"].get<std::string>();
    p.device_pca = !dp.empty() ? dp : p.auth_provider;
    if (p.device_pca.empty() || !w_.is_pca(p.device_pca)) bad("device_pca must name a PCA");
    if (use == PosUse::sep) {
      if (p.auth_provider.empty() || !w_.is_pca(p.auth_provider)) bad("separation of duties needs an auth provider PCA");
      p.charging_provider = first("charging_provider", "separation of duties");
    } else if (use == PosUse::fig4) {
      if (cfg_["vendor_notify"].get<bool>()) p.vendor = first("vendor", "vendor notification");
      if (cfg_["payment_notify"].get<bool>()) p.payment_provider = first("payment_provider", "payment notification");
    }
    return p;
  }

  PosConfig pos_config() const {
    PosConfig c;
    c.encryption = cfg_["encryption"].get<bool>();
    c.vendor_notify = cfg_["vendor_notify"].get<bool>();
    c.payment_notify = cfg_["payment_notify"].get<bool>();
    c.mno_pos_check = cfg_["mno_pos_check"].get<bool>();
    c.decentralised = cfg_["billing"] == "decentralised";
    c.direct_token_check = cfg_["token_check"] == "direct";
    c.charge_limit = cfg_["charge_limit"].get<std::uint64_t>();
    return c;
  }

  PrepaidOperator& prepaid_operator(const std::string& mno) {
    if (!prepaid_ || prepaid_->id() != mno) bad(mno + " runs no prepaid service");
    return *prepaid_;
  }

  void execute(const json& op) {
    const auto name = str(op, "op");
    if (name == "network_access") {
      auto dev = str(op, "device");
      auto it = credentials_.find(dev);
      if (it == credentials_.end()) bad(dev + " holds no subscriber credential");
      network_access(w_, mnos_.at(str(op, "mno")), dev, it->second);
    } else if (name == "enroll") {
      auto& p = w_.platform(str(op, "device"));
      enroll(w_, p, str(op, "pca"), w_.options.batch_size);
    } else if (name == "authenticate") {
      auto& p = w_.platform(str(op, "device"));
      auto count = op.value("count", cfg_["auth_count"].get<std::uint64_t>());
      const auto& services = op["services"];
      for (std::uint64_t i = 0; i < count; ++i) {
        AttestationRequest req;
        req.verifier = services[i % services.size()];
        req.pca = str(op, "pca");
        req.channel = kMobileChannel;
        req.purpose = "auth";
        req.encrypted = true;
        attest(w_, p, req);
      }
    } else if (name == "authority_bind") {
      auto& p = w_.platform(str(op, "device"));
      authority_bind(w_, str(op, "authority"), registry_, p, subscriber_of(p.id), str(op, "pca"));
    } else if (name == "request_subdomain") {
      auto& p = w_.platform(str(op, "device"));
      auto before = p.wallets[str(op, "pca")].peek_for_service();
      request_subdomain(w_, str(op, "mno"), registry_, p, subscriber_of(p.id), str(op, "pca"));
      if (before) subdomain_fp_[p.id] = trust_fingerprint(before->certificate);
    } else if (name == "subdomain_service") {
      subdomain_service(str(op, "device"), str(op, "mno"));
    } else if (name == "apply_policy") {
      push_policy(w_, str(op, "issuer"), w_.platform(str(op, "device")), str(op, "pca"), policy_, str(op, "location"),
                  kMobileChannel);
    } else if (name == "vsim_logon") {
      vsim_logon(w_, w_.platform(str(op, "device")), prepaid_operator(str(op, "mno")));
    } else if (name == "prepaid_request") {
      prepaid_service_request(w_, w_.platform(str(op, "device")), prepaid_operator(str(op, "mno")), str(op, "pca"),
                              str(op, "service"), op["units"].get<std::uint64_t>());
    } else if (name == "top_up") {
      auto r = top_up(w_, w_.platform(str(op, "device")), prepaid_operator(str(op, "mno")),
                      op["value"].get<std::uint64_t>());
      last_voucher_.insert_or_assign(str(op, "device"), r.voucher);
    } else if (name == "replay_voucher") {
      auto it = last_voucher_.find(str(op, "device"));
      if (it == last_voucher_.end()) bad(str(op, "device") + " has no voucher to replay");
      redeem_again(w_, w_.platform(it->first), prepaid_operator(str(op, "mno")).id(), it->second);
    } else if (name == "pos_session") {
      auto parties = pos_parties(op, PosUse::session);
      auto s = mutual_attest_session(w_, w_.platform(parties.device), w_.platform(parties.pos), parties);
      if (s) sessions_.insert_or_assign(parties.device + "|" + parties.pos, *s);
      else sessions_.erase(parties.device + "|" + parties.pos);
    } else if (name == "purchase") {
      purchase(op);
    } else if (name == "rotate_pseudonym") {
      rotate_pos_pseudonym(w_, w_.platform(str(op, "pos")), first("pos_owner", "pseudonym rotation"));
    } else if (name == "enter") {
      enter(op);
    } else if (name == "exit") {
      leave(op);
    } else if (name == "terminal") {
      terminal(op);
    } else if (name == "meeting") {
      meeting(op);
    } else if (name == "idle") {
      w_.net.idle(op["ticks"].get<Tick>());
    }
  }

  const std::string& subscriber_of(const std::string& device) {
    auto it = credentials_.find(device);
    if (it == credentials_.end()) bad(device + " holds no subscriber credential");
    return it->second.device_identity;
  }

  void subdomain_service(const std::string& device, const std::string& mno) {
    auto fp = subdomain_fp_.count(device) ? subdomain_fp_[device] : std::string{};
    auto m = send(w_, device, mno, kMobileChannel, "subdomain-service-request",
                  {field("subscriber_id", Label::identity, subscriber_of(device)),
                   field("trust_fingerprint", Label::token, fp)},
                  true);
    if (!m) return;
    bool ok = registry_.is_admitted(m->get("subscriber_id"), m->get("trust_fingerprint"));
    send(w_, mno, device, kMobileChannel, ok ? "subdomain-service" : "subdomain-withheld",
         {field("status", Label::plumbing, ok ? "granted" : "withheld")}, true);
    w_.net.annotate("subdomain-service", mno, {{"device", device}, {"granted", ok ? "true" : "false"}});
  }

  void purchase(const json& op) {
    bool sep = op["flow"] == "sep-duties";
    auto parties = pos_parties(op, sep ? PosUse::sep : PosUse::fig4);
    auto& dev = w_.platform(parties.device);
    auto& pos = w_.platform(parties.pos);
    auto cfg = pos_config();
    if (!sep) {
      auto it = sessions_.find(parties.device + "|" + parties.pos);
      if (it == sessions_.end()) {
        w_.net.annotate("abort", parties.device, {{"step", "0"}, {"reason", "no-session"}, {"order", ""}});
        return;
      }
      if (specific_.count("strip-ack") && !strip_hooked_) {
        strip_hooked_ = true;
        auto device = parties.device;
        auto target = parties.pos;
        w_.net.add_hook([device, target](sim::Message& m) {
          if (m.kind == "purchase-ack" && m.sender == device && m.receiver == target)
            for (auto& f : m.fields)
              if (f.name == "ack_signature") f.value.clear();
          return true;
        });
        w_.net.annotate("attack", parties.device, {{"name", "strip-ack"}});
      }
      purchase_fig4(w_, dev, pos, parties, cfg, pos_state_, it->second, op["goods"].get<std::vector<std::string>>());
    } else {
      bool reuse = specific_.count("reuse-token") && !pos_state_.last_token.empty();
      purchase_sep_duties(w_, dev, pos, parties, cfg, pos_state_, op["goods"].get<std::vector<std::string>>(), reuse);
    }
  }

  // ---- facility ----

  bool gate_check(const std::string& gate, const std::string& company, const std::string& token,
                  const std::string& zone) {
    if (cfg_["access_check"] == "online") {
      auto q = send(w_, gate, company, kMobileChannel, "access-check",
                    {field("auth_token", Label::token, token), field("zone", Label::policy, zone)}, true);
      if (!q) return false;
      auto r = send(w_, company, gate, kMobileChannel, "access-verdict",
                    {field("zone", Label::policy, q->get("zone")), field("granted", Label::plumbing, "true")}, true);
      return r && r->get("granted") == "true";
    }
    auto& fetched = gate_cache_[gate];
    auto ttl = cfg_["cache_ticks"].get<Tick>();
    if (!fetched || w_.net.now() > *fetched + ttl) {
      auto q = send(w_, gate, company, kMobileChannel, "access-list-request", {field("zone", Label::policy, zone)}, true);
      if (!q) return false;
      auto r = send(w_, company, gate, kMobileChannel, "access-list", {field("zones", Label::policy, zone)}, true);
      if (!r) return false;
      fetched = w_.net.now();
    }
    return true;
  }

  void gate_log(const std::string& gate, const std::string& company, const std::string& device,
                const std::string& action, const std::string& zone, bool granted) {
    send(w_, gate, company, kMobileChannel, "gate-log",
         {field("device", Label::identity, device), field("action", Label::plumbing, action),
          field("zone", Label::policy, zone), field("granted", Label::plumbing, granted ? "true" : "false")},
         true);
  }

  void enter(const json& op) {
    auto dev_id = str(op, "device");
    auto gate = str(op, "gate");
    auto zone = str(op, "zone");
    auto pca = str(op, "pca");
    auto company = company_of();
    auto& dev = w_.platform(dev_id);
    if (!dev.wallets.count(pca)) bad(dev_id + " holds no credentials from " + pca);

    AttestationRequest req;
    req.verifier = gate;
    req.pca = pca;
    req.trusted_pca = company;
    req.purpose = "entry";
    auto out = attest(w_, dev, req);
    if (!out.response) return;
    bool enforcer = chain_measures(codec::decode_log(out.response->get("log")), kEnforcerComponent);
    std::string reason = "ok";
    if (!out.verdict.accepted)
      reason = out.verdict.reasons_string();
    else if (!enforcer)
      reason = "enforcer-not-measured";
    else if (!gate_check(gate, company, out.response->get("certificate"), zone))
      reason = "access-refused";
    bool granted = reason == "ok";
    send(w_, gate, dev_id, kShortRangeChannel, "entry-result",
         {field("zone", Label::policy, zone), field("granted", Label::plumbing, granted ? "true" : "false")}, false);
    w_.net.annotate("entry", gate,
                    {{"device", dev_id}, {"zone", zone}, {"granted", granted ? "true" : "false"}, {"reason", reason}});
    gate_log(gate, company, dev_id, "entry", zone, granted);
    if (!granted) return;
    inside_[dev_id] = FacilityDevice{zone, pca};
    push_policy(w_, company, dev, pca, policy_, zone, kMobileChannel);
  }

  void leave(const json& op) {
    auto dev_id = str(op, "device");
    auto gate = str(op, "gate");
    auto it = inside_.find(dev_id);
    if (it == inside_.end()) bad(dev_id + " is not inside");
    auto company = company_of();
    auto m = send(w_, dev_id, gate, kShortRangeChannel, "exit", {field("zone", Label::policy, it->second.zone)}, false);
    if (!m) return;
    w_.net.annotate("exit", gate, {{"device", dev_id}, {"zone", it->second.zone}});
    gate_log(gate, company, dev_id, "exit", it->second.zone, true);
    auto pca = it->second.pca;
    inside_.erase(it);
    push_policy(w_, company, w_.platform(dev_id), pca, policy_, "outside", kMobileChannel);
  }

  void terminal(const json& op) {
    auto dev = str(op, "device");
    auto term = str(op, "terminal");
    auto server = str(op, "server");
    if (!inside_.count(dev)) bad(dev + " is not inside");
    auto a = send(w_, term, dev, kShortRangeChannel, "terminal-request", {field("request", Label::plumbing, str(op, "request"))},
                  false);
    if (!a) return;
    auto b = send(w_, dev, server, kMobileChannel, "terminal-request",
                  {field("request", Label::plumbing, a->get("request")), field("terminal", Label::plumbing, term)}, true);
    if (!b) return;
    auto c = send(w_, server, dev, kMobileChannel, "terminal-response",
                  {field("request", Label::plumbing, b->get("request")), field("outcome", Label::plumbing, "done")}, true);
    if (!c) return;
    auto d = send(w_, dev, term, kShortRangeChannel, "terminal-response", c->fields, false);
    if (d) w_.net.annotate("terminal-served", server, {{"device", dev}, {"terminal", term}, {"request", d->get("request")}});
  }

  void meeting(const json& op) {
    auto server = str(op, "server");
    auto external = str(op, "external");
    std::string attendees;
    for (const auto& a : op["attendees"]) attendees += (attendees.empty() ? "" : ",") + a.get<std::string>();
    std::vector<sim::Field> request{field("room", Label::plumbing, str(op, "room")),
                                    field("power", Label::plumbing, "on"),
                                    field("start", Label::plumbing, std::to_string(w_.net.now() + 1)),
                                    field("end", Label::plumbing, std::to_string(w_.net.now() + 120)),
                                    field("attendees", Label::identity, attendees)};
    // The enforcer on the company side lets only allow-listed fields leave.
    std::set<std::string> allowed;
    for (const auto& a : cfg_["enforcer_allowed"]) allowed.insert(a.get<std::string>());
    std::vector<sim::Field> outgoing;
    std::string removed;
    for (auto& f : request) {
      if (allowed.count(f.name))
        outgoing.push_back(std::move(f));
      else
        removed += (removed.empty() ? "" : ",") + f.name;
    }
    w_.net.annotate("enforcer-filtered", server, {{"removed", removed}, {"external", external}});
    auto m = send(w_, server, external, kMobileChannel, "service-request", outgoing, true);
    if (!m) return;
    send(w_, external, server, kMobileChannel, "service-confirmation",
         {field("room", Label::plumbing, m->has("room") ? m->get("room") : ""), field("status", Label::plumbing, "booked")},
         true);
  }

  const ScenarioScript& script_;
  json cfg_;
  World w_;
  std::set<std::string> specific_;
  std::string carrier_;
  std::map<std::string, std::string> roles_;
  std::map<std::string, std::vector<std::string>> by_role_;
  std::map<std::string, Mno> mnos_;
  std::map<std::string, GenericCredential> credentials_;
  SubdomainRegistry registry_;
  FeaturePolicy policy_;
  std::map<std::string, std::string> subdomain_fp_;
  std::optional<PrepaidOperator> prepaid_;
  std::map<std::string, Voucher> last_voucher_;
  PosState pos_state_;
  std::map<std::string, PosSession> sessions_;
  bool strip_hooked_ = false;
  std::map<std::string, FacilityDevice> inside_;
  std::map<std::string, std::optional<Tick>> gate_cache_;
};

const std::vector<std::string> kCommonAssertions{"knowledge-sound", "channel-separation", "labels-fixed",
                                                 "attack-detected", "no-double-accept", "ops-completed"};

}  // namespace

RunResult run_scenario(const ScenarioScript& script, const RunOptions& options) {
  auto cfg = merge_config(default_config(), script.doc.value("config", json::object()));
  for (const auto& v : options.variants) {
    auto [k, value] = parse_variant(v);
    cfg[k] = value;
  }
  validate_config(cfg);

  auto supported = supported_attacks(script);
  std::optional<GenericAttack> generic;
  std::set<std::string> specific;
  for (const auto& a : options.attacks) {
    if (std::find(supported.begin(), supported.end(), a) == supported.end())
      bad("attack " + a + " is not supported by " + script.name);
    if (auto g = generic_attack_from_string(a)) {
      if (generic) bad("at most one generic attack per run");
      generic = g;
    } else {
      specific.insert(a);
    }
  }

  Engine engine(script, cfg, options.seed, generic, specific);
  engine.run();

  json assertions = json::array();
  for (const auto& a : kCommonAssertions) assertions.push_back(a);
  for (const auto& a : script.doc.value("assertions", json::array()))
    if (std::find(assertions.begin(), assertions.end(), a) == assertions.end()) assertions.push_back(a);
  if (script.doc.contains("expect_events")) assertions.push_back("expected-events");

  json header{{"scenario", script.name},
              {"kind", script.kind},
              {"seed", options.seed},
              {"attacks", options.attacks},
              {"variants", options.variants},
              {"config", cfg},
              {"script", script.doc},
              {"assertions", assertions}};
  RunResult r;
  r.transcript = engine.world().net.finish(header);
  r.jsonl = sim::to_jsonl(r.transcript);
  r.report = check_transcript(r.transcript, sha256_hex(to_bytes(r.jsonl)));
  return r;
}

}  // namespace tcsim
