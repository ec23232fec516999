#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tcsim/protocol.hpp"

namespace tcsim {

// Network-access credential c_MNO. Clones share it by construction.
struct GenericCredential {
  std::string device_identity;
  std::string issuer;
  KeyPair key;
};

// Subscriber database of one operator.
class Mno {
 public:
  explicit Mno(std::string id) : id_(std::move(id)) {}

  const std::string& id() const { return id_; }
  void add_subscriber(const std::string& identity, const PublicKey& key) { subscribers_[identity] = key; }
  const PublicKey* subscriber(const std::string& identity) const;

 private:
  std::string id_;
  std::map<std::string, PublicKey> subscribers_;
};

// Digest of the AIK public key behind a trust credential.
std::string trust_fingerprint(const AikCertificate& cert);

enum class RegistryMode { bound, unbound };
std::string_view to_string(RegistryMode m);
std::optional<RegistryMode> registry_mode_from_string(std::string_view s);

enum class Admission { admitted, attestation_failed, clone_conflict, credential_inconsistency };
std::string_view to_string(Admission a);

class SubdomainRegistry {
 public:
  explicit SubdomainRegistry(RegistryMode mode) : mode_(mode) {}

  RegistryMode mode() const { return mode_; }
  // Authority-issued (c_MNO, t_Rest) pair from joint enrollment.
  void bind(const std::string& identity, const std::string& fingerprint) { bindings_.insert({identity, fingerprint}); }

  // Pure decision against the current state.
  Admission decide(const std::string& identity, const std::string& fingerprint, bool attestation_accepted) const;
  // decide() and, on admission, record the first fingerprint for the identity.
  Admission request(const std::string& identity, const std::string& fingerprint, bool attestation_accepted);
  bool is_admitted(const std::string& identity, const std::string& fingerprint) const;

 private:
  RegistryMode mode_;
  std::set<std::pair<std::string, std::string>> bindings_;
  std::map<std::string, std::string> admitted_;
};

enum class Feature { enabled, disabled };

struct LocationRule {
  std::string cell;
  std::map<std::string, Feature> overrides;
};

struct FeaturePolicy {
  std::map<std::string, Feature> features;
  std::vector<LocationRule> location_rules;
};

using FeatureMap = std::map<std::string, Feature>;

// Base policy overridden by the first rule matching the location.
FeatureMap effective_features(const FeaturePolicy& policy, const std::string& location);
// nullopt means "unenforced": the enforcement component is missing or the
// platform failed attestation.
std::optional<FeatureMap> apply_policy(bool enforcer_measured, bool attestation_accepted, const FeaturePolicy& policy,
                                       const std::string& location);
std::string describe(const FeatureMap& features);  // "camera=disabled,mms=enabled"

FeaturePolicy parse_feature_policy(const nlohmann::json& j);
bool chain_measures(const MeasurementLog& log, const std::string& component);

inline constexpr const char* kEnforcerComponent = "enforcer";

// ---- message flows ----

// Challenge-response with the generic credential. Returns the session
// identity on success.
std::optional<std::string> network_access(World& w, const Mno& mno, const std::string& device,
                                          const GenericCredential& c);

// Joint enrollment: the authority records (c_MNO, t_Rest) for the device's
// next credential from the restriction PCA.
void authority_bind(World& w, const std::string& authority, SubdomainRegistry& registry, Platform& device,
                    const std::string& identity, const std::string& pca);

Admission request_subdomain(World& w, const std::string& mno, SubdomainRegistry& registry, Platform& device,
                            const std::string& identity, const std::string& pca);

// Attests the device's enforcement component and pushes the effective map.
std::optional<FeatureMap> push_policy(World& w, const std::string& issuer, Platform& device, const std::string& pca,
                                      const FeaturePolicy& policy, const std::string& location,
                                      const std::string& channel);

}  // namespace tcsim
