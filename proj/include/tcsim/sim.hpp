#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tcsim/certificate.hpp"

namespace tcsim::sim {

inline constexpr std::string_view kTranscriptSchema = "tcsim-transcript/1";

// Fixed sensitivity taxonomy. Scenario configs cannot add labels.
enum class Label { identity, good, price, token, balance, policy, plumbing };

inline constexpr Label kAllLabels[] = {Label::identity, Label::good,   Label::price,   Label::token,
                                       Label::balance,  Label::policy, Label::plumbing};

std::string_view to_string(Label l);
std::optional<Label> label_from_string(std::string_view s);

struct Field {
  std::string name;
  Label label = Label::plumbing;
  std::string value;
  // End-to-end sealed for these parties; empty means readable by the receiver.
  std::vector<std::string> readers;

  bool operator==(const Field&) const = default;
};

enum class ChannelKind { mobile_network, short_range };

std::string_view to_string(ChannelKind k);

struct Channel {
  std::string id;
  ChannelKind kind = ChannelKind::mobile_network;
  std::string carrier;  // empty for short range
};

struct Message {
  std::uint64_t id = 0;
  Tick tick = 0;
  std::string sender;
  std::string receiver;
  std::string channel;
  std::string kind;
  bool encrypted = false;
  std::vector<Field> fields;

  const Field* find(std::string_view name) const;
  bool has(std::string_view name) const { return find(name) != nullptr; }
  // Throws malformed-message when the field is missing.
  const std::string& get(std::string_view name) const;
  std::set<std::string> field_names() const;

  bool operator==(const Message&) const = default;
};

struct Event {
  Tick tick = 0;
  std::string kind;
  std::string party;
  std::map<std::string, std::string> attrs;

  std::string attr(const std::string& key) const;
  bool operator==(const Event&) const = default;
};

using Record = std::variant<Message, Event>;

struct KnownValue {
  Label label = Label::plumbing;
  std::string field;
  std::string value;

  auto operator<=>(const KnownValue&) const = default;
};

using KnowledgeSet = std::set<KnownValue>;

// What a carrier sees of a message it transports.
struct CarrierRecord {
  std::uint64_t msg_id = 0;
  std::string channel;
  std::string src;
  std::string dst;
  std::vector<std::string> field_names;  // empty when enveloped

  bool operator==(const CarrierRecord&) const = default;
};

struct Transcript {
  nlohmann::json header = nlohmann::json::object();
  std::vector<Record> records;
  std::map<std::string, KnowledgeSet> knowledge;
  std::map<std::string, std::vector<CarrierRecord>> carrier_views;

  std::vector<const Message*> messages() const;
  std::vector<const Message*> messages_of_kind(std::string_view kind) const;
  std::vector<const Event*> events() const;
  std::vector<const Event*> events_of_kind(std::string_view kind) const;
  // Roster from the header: party id -> role.
  std::map<std::string, std::string> roster() const;
  std::vector<Channel> channels() const;
};

// Values of one label, or of one field name, readable by the party.
// Throws unknown-party.
std::set<std::string> knowledge_query(const Transcript& t, const std::string& party, std::string_view label_or_field);

std::string to_jsonl(const Transcript& t);
// Throws malformed-message on any syntax or schema problem.
Transcript parse_jsonl(std::string_view text);

// Result of re-deriving knowledge sets and carrier views from the raw messages.
struct AuditResult {
  bool ok = true;
  std::vector<std::string> problems;
};

AuditResult audit_knowledge(const Transcript& t);

// Attack hook: may edit the message in flight; returning false drops it.
using Hook = std::function<bool(Message&)>;

// Strictly sequential delivery loop. Time advances one tick per delivered
// message.
class Network {
 public:
  void add_party(const std::string& id, const std::string& role);
  void add_channel(Channel channel);
  bool has_party(const std::string& id) const { return roles_.count(id) != 0; }
  const std::string& role_of(const std::string& id) const;
  const Channel& channel(const std::string& id) const;

  void add_hook(Hook hook) { hooks_.push_back(std::move(hook)); }

  // Assigns id and tick, applies hooks, records, updates knowledge. Returns
  // the message as delivered, or nullopt when a hook dropped it.
  std::optional<Message> deliver(Message m);
  void annotate(std::string kind, std::string party, std::map<std::string, std::string> attrs = {});
  void idle(Tick ticks);

  Tick now() const { return now_; }
  const KnowledgeSet& knowledge(const std::string& party) const;
  const Transcript& transcript() const { return transcript_; }

  // Fills roster and channels into the header, snapshots knowledge.
  Transcript finish(nlohmann::json header) const;

 private:
  void learn(const Message& m);

  std::map<std::string, std::string> roles_;
  std::map<std::string, Channel> channels_;
  std::vector<Hook> hooks_;
  std::map<std::string, KnowledgeSet> knowledge_;
  std::map<std::string, std::vector<CarrierRecord>> carrier_views_;
  Transcript transcript_;
  Tick now_ = 0;
  std::uint64_t next_id_ = 1;
};

}  // namespace tcsim::sim
