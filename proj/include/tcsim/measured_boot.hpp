#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcsim/crypto.hpp"
#include "tcsim/trust_anchor.hpp"

namespace tcsim {

struct BootComponent {
  std::string name;
  Bytes payload;  // stand-in for the component's code image
  std::size_t stage = 0;
  std::optional<PcrIndex> pcr;  // overrides the boot register for this stage
};

struct LogEntry {
  std::string component;
  Digest160 measurement;
  PcrIndex pcr = kBootPcr;

  bool operator==(const LogEntry&) const = default;
};

// Append-only during boot; entry order equals boot order.
struct MeasurementLog {
  std::vector<LogEntry> entries;

  bool operator==(const MeasurementLog&) const = default;
};

// Verifier-side expected measurement per component name.
class ReferenceDb {
 public:
  void add(const std::string& component, const Digest160& digest) { refs_[component] = digest; }
  std::optional<Digest160> find(const std::string& component) const;
  bool matches(const LogEntry& entry) const;
  std::size_t size() const { return refs_.size(); }

  // References for an untampered chain.
  static ReferenceDb from_chain(const std::vector<BootComponent>& chain);

 private:
  std::map<std::string, Digest160> refs_;
};

// Builds a chain with consecutive stages starting at 0.
std::vector<BootComponent> make_chain(const std::vector<std::pair<std::string, std::string>>& components);

// Measures, extends and logs each component in order. The chain must be
// non-empty with strictly increasing stages starting at 0.
MeasurementLog boot(TrustAnchor& anchor, const std::vector<BootComponent>& chain, PcrIndex pcr = kBootPcr);

// Replaces a component's payload; throws unknown-component when absent.
std::vector<BootComponent> tamper(std::vector<BootComponent> chain, const std::string& component, Bytes new_payload);

// Overwrites one log entry's digest. The registers are untouched, which is the
// point: a verifier recomputing from the log must notice.
MeasurementLog forge_log(MeasurementLog log, std::size_t entry_index, const Digest160& fake);

}  // namespace tcsim
