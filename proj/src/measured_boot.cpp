#include "tcsim/measured_boot.hpp"

#include <algorithm>

#include "tcsim/error.hpp"

namespace tcsim {

std::optional<Digest160> ReferenceDb::find(const std::string& component) const {
  auto it = refs_.find(component);
  if (it == refs_.end()) return std::nullopt;
  return it->second;
}

bool ReferenceDb::matches(const LogEntry& entry) const {
  auto ref = find(entry.component);
  return ref && *ref == entry.measurement;
}

ReferenceDb ReferenceDb::from_chain(const std::vector<BootComponent>& chain) {
  ReferenceDb db;
  for (const auto& c : chain) db.add(c.name, hash160(c.payload));
  return db;
}

std::vector<BootComponent> make_chain(const std::vector<std::pair<std::string, std::string>>& components) {
  std::vector<BootComponent> chain;
  for (std::size_t i = 0; i < components.size(); ++i)
    chain.push_back(BootComponent{components[i].first, to_bytes(components[i].second), i, std::nullopt});
  return chain;
}

MeasurementLog boot(TrustAnchor& anchor, const std::vector<BootComponent>& chain, PcrIndex pcr) {
  if (chain.empty()) throw Error(Errc::empty_chain);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].stage != i) throw Error(Errc::invalid_structure, "boot stages must run 0,1,2,...");
  }
  for (const auto& component : chain) {
    if (!anchor.read_pcr(component.pcr.value_or(pcr)).is_zero())
      throw Error(Errc::invalid_structure, "anchor is not at reset");
  }
  MeasurementLog log;
  for (const auto& component : chain) {
    const PcrIndex target = component.pcr.value_or(pcr);
    const Digest160 measurement = hash160(component.payload);
    anchor.extend(target, measurement);
    log.entries.push_back(LogEntry{component.name, measurement, target});
  }
  return log;
}

std::vector<BootComponent> tamper(std::vector<BootComponent> chain, const std::string& component, Bytes new_payload) {
  auto it = std::find_if(chain.begin(), chain.end(), [&](const BootComponent& c) { return c.name == component; });
  if (it == chain.end()) throw Error(Errc::unknown_component, component);
  it->payload = std::move(new_payload);
  return chain;
}

MeasurementLog forge_log(MeasurementLog log, std::size_t entry_index, const Digest160& fake) {
  if (entry_index >= log.entries.size()) throw Error(Errc::log_index_out_of_range, std::to_string(entry_index));
  log.entries[entry_index].measurement = fake;
  return log;
}

}  // namespace tcsim
