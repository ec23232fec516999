#include "tcsim/sim.hpp"

#include <algorithm>
#include <sstream>

#include "tcsim/error.hpp"

namespace tcsim::sim {

using nlohmann::json;

std::string_view to_string(Label l) {
  switch (l) {
    case Label::identity: return "identity";
    case Label::good: return "good";
    case Label::price: return "price";
    case Label::token: return "token";
    case Label::balance: return "balance";
    case Label::policy: return "policy";
    case Label::plumbing: return "plumbing";
  }
  return "plumbing";
}

std::optional<Label> label_from_string(std::string_view s) {
  for (auto l : kAllLabels)
    if (to_string(l) == s) return l;
  return std::nullopt;
}

std::string_view to_string(ChannelKind k) {
  return k == ChannelKind::mobile_network ? "mobile_network" : "short_range";
}

const Field* Message::find(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

const std::string& Message::get(std::string_view name) const {
  const auto* f = find(name);
  if (!f) throw Error(Errc::malformed_message, kind + " lacks field " + std::string(name));
  return f->value;
}

std::set<std::string> Message::field_names() const {
  std::set<std::string> out;
  for (const auto& f : fields) out.insert(f.name);
  return out;
}

std::string Event::attr(const std::string& key) const {
  auto it = attrs.find(key);
  return it == attrs.end() ? std::string{} : it->second;
}

std::vector<const Message*> Transcript::messages() const {
  std::vector<const Message*> out;
  for (const auto& r : records)
    if (const auto* m = std::get_if<Message>(&r)) out.push_back(m);
  return out;
}

std::vector<const Message*> Transcript::messages_of_kind(std::string_view kind) const {
  std::vector<const Message*> out;
  for (const auto* m : messages())
    if (m->kind == kind) out.push_back(m);
  return out;
}

std::vector<const Event*> Transcript::events() const {
  std::vector<const Event*> out;
  for (const auto& r : records)
    if (const auto* e = std::get_if<Event>(&r)) out.push_back(e);
  return out;
}

std::vector<const Event*> Transcript::events_of_kind(std::string_view kind) const {
  std::vector<const Event*> out;
  for (const auto* e : events())
    if (e->kind == kind) out.push_back(e);
  return out;
}

std::map<std::string, std::string> Transcript::roster() const {
  std::map<std::string, std::string> out;
  if (header.contains("roster") && header["roster"].is_object())
    for (const auto& [k, v] : header["roster"].items()) out[k] = v.get<std::string>();
  return out;
}

std::vector<Channel> Transcript::channels() const {
  std::vector<Channel> out;
  if (!header.contains("channels")) return out;
  for (const auto& c : header["channels"]) {
    Channel ch;
    ch.id = c.at("id").get<std::string>();
    ch.kind = c.at("kind").get<std::string>() == "short_range" ? ChannelKind::short_range : ChannelKind::mobile_network;
    ch.carrier = c.at("carrier").get<std::string>();
    out.push_back(ch);
  }
  return out;
}

std::set<std::string> knowledge_query(const Transcript& t, const std::string& party, std::string_view label_or_field) {
  auto roster = t.roster();
  if (!roster.count(party)) throw Error(Errc::unknown_party, party);
  std::set<std::string> out;
  auto it = t.knowledge.find(party);
  if (it == t.knowledge.end()) return out;
  auto label = label_from_string(label_or_field);
  for (const auto& kv : it->second)
    if ((label && kv.label == *label) || (!label && kv.field == label_or_field)) out.insert(kv.value);
  return out;
}

// ---- Network ----

void Network::add_party(const std::string& id, const std::string& role) {
  if (!roles_.emplace(id, role).second) throw Error(Errc::config_error, "duplicate party " + id);
  knowledge_[id];
}

void Network::add_channel(Channel channel) {
  if (channel.kind == ChannelKind::short_range) channel.carrier.clear();
  if (!channel.carrier.empty() && !roles_.count(channel.carrier))
    throw Error(Errc::unknown_party, channel.carrier);
  auto id = channel.id;
  if (!channels_.emplace(id, std::move(channel)).second) throw Error(Errc::config_error, "duplicate channel " + id);
}

const std::string& Network::role_of(const std::string& id) const {
  auto it = roles_.find(id);
  if (it == roles_.end()) throw Error(Errc::unknown_party, id);
  return it->second;
}

const Channel& Network::channel(const std::string& id) const {
  auto it = channels_.find(id);
  if (it == channels_.end()) throw Error(Errc::config_error, "unknown channel " + id);
  return it->second;
}

const KnowledgeSet& Network::knowledge(const std::string& party) const {
  auto it = knowledge_.find(party);
  if (it == knowledge_.end()) throw Error(Errc::unknown_party, party);
  return it->second;
}

std::optional<Message> Network::deliver(Message m) {
  role_of(m.sender);
  role_of(m.receiver);
  channel(m.channel);
  m.id = next_id_++;
  m.tick = now_;
  for (const auto& hook : hooks_) {
    if (!hook(m)) {
      annotate("drop", m.receiver, {{"msg_id", std::to_string(m.id)}, {"kind", m.kind}});
      return std::nullopt;
    }
  }
  learn(m);
  transcript_.records.emplace_back(m);
  ++now_;
  return m;
}

void Network::learn(const Message& m) {
  auto& rk = knowledge_[m.receiver];
  for (const auto& f : m.fields) {
    bool readable = !m.encrypted || f.readers.empty() ||
                    std::find(f.readers.begin(), f.readers.end(), m.receiver) != f.readers.end();
    if (readable) rk.insert({f.label, f.name, f.value});
  }
  const auto& ch = channels_.at(m.channel);
  if (ch.kind != ChannelKind::mobile_network || ch.carrier.empty()) return;
  CarrierRecord rec{m.id, m.channel, m.sender, m.receiver, {}};
  if (!m.encrypted) {
    auto& ck = knowledge_[ch.carrier];
    for (const auto& f : m.fields) {
      ck.insert({f.label, f.name, f.value});
      rec.field_names.push_back(f.name);
    }
  }
  carrier_views_[ch.carrier].push_back(std::move(rec));
}

void Network::annotate(std::string kind, std::string party, std::map<std::string, std::string> attrs) {
  transcript_.records.emplace_back(Event{now_, std::move(kind), std::move(party), std::move(attrs)});
}

void Network::idle(Tick ticks) {
  annotate("idle", "", {{"ticks", std::to_string(ticks)}});
  now_ += ticks;
}

Transcript Network::finish(json header) const {
  Transcript t = transcript_;
  json roster = json::object();
  for (const auto& [id, role] : roles_) roster[id] = role;
  header["roster"] = roster;
  json channels = json::array();
  for (const auto& [id, c] : channels_)
    channels.push_back({{"id", id}, {"kind", to_string(c.kind)}, {"carrier", c.carrier}});
  header["channels"] = channels;
  t.header = std::move(header);
  t.knowledge = knowledge_;
  t.carrier_views = carrier_views_;
  return t;
}

// ---- Serialization ----

namespace {

json field_json(const Field& f) {
  return {{"name", f.name}, {"label", to_string(f.label)}, {"value", f.value}, {"readers", f.readers}};
}

json message_json(const Message& m) {
  json fields = json::array();
  for (const auto& f : m.fields) fields.push_back(field_json(f));
  return {{"type", "message"}, {"id", m.id},           {"tick", m.tick},           {"sender", m.sender},
          {"receiver", m.receiver}, {"channel", m.channel}, {"kind", m.kind}, {"encrypted", m.encrypted},
          {"fields", fields}};
}

json event_json(const Event& e) {
  return {{"type", "event"}, {"tick", e.tick}, {"kind", e.kind}, {"party", e.party}, {"attrs", e.attrs}};
}

[[noreturn]] void bad(const std::string& why) { throw Error(Errc::malformed_message, "transcript: " + why); }

Label parse_label(const json& j) {
  auto l = label_from_string(j.get<std::string>());
  if (!l) bad("unknown label " + j.get<std::string>());
  return *l;
}

Message parse_message(const json& j) {
  Message m;
  m.id = j.at("id").get<std::uint64_t>();
  m.tick = j.at("tick").get<Tick>();
  m.sender = j.at("sender").get<std::string>();
  m.receiver = j.at("receiver").get<std::string>();
  m.channel = j.at("channel").get<std::string>();
  m.kind = j.at("kind").get<std::string>();
  m.encrypted = j.at("encrypted").get<bool>();
  for (const auto& f : j.at("fields")) {
    m.fields.push_back({f.at("name").get<std::string>(), parse_label(f.at("label")), f.at("value").get<std::string>(),
                        f.at("readers").get<std::vector<std::string>>()});
  }
  return m;
}

}  // namespace

std::string to_jsonl(const Transcript& t) {
  std::ostringstream out;
  json header = t.header;
  header["type"] = "header";
  header["schema"] = kTranscriptSchema;
  out << header.dump() << '\n';
  std::size_t n_msg = 0, n_evt = 0;
  for (const auto& r : t.records) {
    if (const auto* m = std::get_if<Message>(&r)) {
      out << message_json(*m).dump() << '\n';
      ++n_msg;
    } else {
      out << event_json(std::get<Event>(r)).dump() << '\n';
      ++n_evt;
    }
  }
  for (const auto& [party, ks] : t.knowledge) {
    json values = json::array();
    for (const auto& kv : ks) values.push_back({{"label", to_string(kv.label)}, {"field", kv.field}, {"value", kv.value}});
    out << json{{"type", "knowledge"}, {"party", party}, {"values", values}}.dump() << '\n';
  }
  for (const auto& [carrier, recs] : t.carrier_views) {
    json records = json::array();
    for (const auto& c : recs)
      records.push_back({{"msg_id", c.msg_id}, {"channel", c.channel}, {"src", c.src}, {"dst", c.dst},
                         {"field_names", c.field_names}});
    out << json{{"type", "carrier-view"}, {"carrier", carrier}, {"records", records}}.dump() << '\n';
  }
  out << json{{"type", "end"}, {"messages", n_msg}, {"events", n_evt}}.dump() << '\n';
  return out.str();
}

Transcript parse_jsonl(std::string_view text) {
  Transcript t;
  bool have_header = false, have_end = false;
  std::size_t n_msg = 0, n_evt = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.empty()) continue;
    if (have_end) bad("content after end record");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      bad(e.what());
    }
    try {
      auto type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header" || j.value("schema", "") != kTranscriptSchema) bad("missing header");
        j.erase("type");
        j.erase("schema");
        t.header = j;
        have_header = true;
      } else if (type == "message") {
        t.records.emplace_back(parse_message(j));
        ++n_msg;
      } else if (type == "event") {
        t.records.emplace_back(Event{j.at("tick").get<Tick>(), j.at("kind").get<std::string>(),
                                     j.at("party").get<std::string>(),
                                     j.at("attrs").get<std::map<std::string, std::string>>()});
        ++n_evt;
      } else if (type == "knowledge") {
        auto& ks = t.knowledge[j.at("party").get<std::string>()];
        for (const auto& v : j.at("values"))
          ks.insert({parse_label(v.at("label")), v.at("field").get<std::string>(), v.at("value").get<std::string>()});
      } else if (type == "carrier-view") {
        auto& view = t.carrier_views[j.at("carrier").get<std::string>()];
        for (const auto& c : j.at("records"))
          view.push_back({c.at("msg_id").get<std::uint64_t>(), c.at("channel").get<std::string>(),
                          c.at("src").get<std::string>(), c.at("dst").get<std::string>(),
                          c.at("field_names").get<std::vector<std::string>>()});
      } else if (type == "end") {
        if (j.at("messages").get<std::size_t>() != n_msg || j.at("events").get<std::size_t>() != n_evt)
          bad("record counts disagree with end record");
        have_end = true;
      } else {
        bad("unknown record type " + type);
      }
    } catch (const json::exception& e) {
      bad(e.what());
    }
  }
  if (!have_header) bad("empty transcript");
  if (!have_end) bad("truncated transcript");
  return t;
}

}  // namespace tcsim::sim
