#include <algorithm>

#include "tcsim/sim.hpp"

namespace tcsim::sim {

// Re-derives every knowledge set and carrier view from the raw message
// records alone and compares them with the recorded snapshots.
AuditResult audit_knowledge(const Transcript& t) {
  AuditResult r;
  auto problem = [&](std::string s) {
    r.ok = false;
    r.problems.push_back(std::move(s));
  };

  auto roster = t.roster();
  std::map<std::string, Channel> channels;
  for (const auto& c : t.channels()) channels[c.id] = c;

  std::map<std::string, KnowledgeSet> derived;
  std::map<std::string, std::vector<CarrierRecord>> views;
  for (const auto& [party, role] : roster) derived[party];

  std::uint64_t last_id = 0;
  Tick last_tick = 0;
  for (const auto* m : t.messages()) {
    if (!roster.count(m->sender) || !roster.count(m->receiver)) {
      problem("message " + std::to_string(m->id) + " names an unregistered party");
      continue;
    }
    auto ch = channels.find(m->channel);
    if (ch == channels.end()) {
      problem("message " + std::to_string(m->id) + " on undeclared channel " + m->channel);
      continue;
    }
    if (m->id <= last_id) problem("message ids not increasing at " + std::to_string(m->id));
    if (m->tick < last_tick) problem("ticks decrease at message " + std::to_string(m->id));
    last_id = m->id;
    last_tick = m->tick;

    for (const auto& f : m->fields) {
      bool sealed_elsewhere = m->encrypted && !f.readers.empty() &&
                              std::count(f.readers.begin(), f.readers.end(), m->receiver) == 0;
      if (!sealed_elsewhere) derived[m->receiver].insert({f.label, f.name, f.value});
    }
    const auto& c = ch->second;
    if (c.kind == ChannelKind::short_range || c.carrier.empty()) continue;
    CarrierRecord rec{m->id, m->channel, m->sender, m->receiver, {}};
    if (!m->encrypted) {
      for (const auto& f : m->fields) {
        derived[c.carrier].insert({f.label, f.name, f.value});
        rec.field_names.push_back(f.name);
      }
    }
    views[c.carrier].push_back(rec);
  }

  for (const auto& [party, ks] : derived) {
    auto it = t.knowledge.find(party);
    const KnowledgeSet empty;
    const auto& recorded = it == t.knowledge.end() ? empty : it->second;
    if (recorded != ks) problem("knowledge set of " + party + " differs from replay");
  }
  for (const auto& [party, ks] : t.knowledge)
    if (!derived.count(party)) problem("knowledge recorded for unregistered party " + party);

  if (views != t.carrier_views) problem("carrier views differ from replay");

  // Channel separation: nothing sent over short range may show up in a view.
  std::set<std::uint64_t> short_ids;
  for (const auto* m : t.messages()) {
    auto ch = channels.find(m->channel);
    if (ch != channels.end() && ch->second.kind == ChannelKind::short_range) short_ids.insert(m->id);
  }
  for (const auto& [carrier, recs] : t.carrier_views)
    for (const auto& rec : recs)
      if (short_ids.count(rec.msg_id)) problem("short-range message in view of " + carrier);
  return r;
}

}  // namespace tcsim::sim
