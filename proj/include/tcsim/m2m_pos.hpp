#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tcsim/protocol.hpp"

namespace tcsim {

struct PriceList {
  std::vector<std::pair<std::string, std::uint64_t>> entries;  // good id, price
  std::string location;
  Signature signature;  // POS owner
};

Bytes price_list_tbs(const PriceList& list);
PriceList sign_price_list(const KeyPair& owner, std::vector<std::pair<std::string, std::uint64_t>> entries,
                          std::string location);
bool verify_price_list(const PriceList& list, const PublicKey& owner);

// Exactly {auth_token, grand_total, signature}; nothing about the goods.
struct BillingPackage {
  std::string auth_token;
  std::uint64_t grand_total = 0;
  Signature signature;
};

inline const std::set<std::string> kBillingPackageFields{"auth_token", "grand_total", "signature"};

Bytes billing_tbs(const std::string& auth_token, std::uint64_t grand_total);
BillingPackage make_billing_package(const KeyPair& owner, std::string auth_token, std::uint64_t grand_total);
bool verify_billing_package(const BillingPackage& pkg, const PublicKey& owner);

// Throws invalid-structure unless the names are exactly the package fields.
void check_billing_fields(const std::vector<sim::Field>& fields);
std::vector<sim::Field> billing_fields(const BillingPackage& pkg, std::vector<std::string> readers);
BillingPackage parse_billing_package(const sim::Message& m);

Bytes ack_tbs(const std::string& order_id, std::uint64_t total, const std::string& status);

struct PosConfig {
  bool encryption = true;
  bool vendor_notify = true;
  bool payment_notify = true;
  bool mno_pos_check = false;
  bool decentralised = false;
  bool direct_token_check = false;
  std::uint64_t charge_limit = 100000;
};

struct PosParties {
  std::string device;
  std::string pos;
  std::string mno;
  std::string pos_owner;
  std::string vendor;
  std::string payment_provider;
  std::string auth_provider;
  std::string charging_provider;
  std::string device_pca;  // issuer of the device's credentials
  std::string pos_pca;     // issuer of the POS pseudonyms
};

struct PosSession {
  AikCertificate device_certificate;
  AikCertificate pos_certificate;
};

// Run-wide state of the POS world beyond the individual platforms.
struct PosState {
  std::map<std::string, std::uint64_t> catalog;
  std::string location;
  std::set<std::string> owner_used_tokens;
  std::set<std::string> auth_used_tokens;
  std::vector<sim::Field> last_token;  // what the device last presented
  std::set<std::string> mno_seen_orders;
};

std::optional<PosSession> mutual_attest_session(World& w, Platform& device, Platform& pos, const PosParties& parties);

// Seven-message flow of the generic trusted M2M purchase.
bool purchase_fig4(World& w, Platform& device, Platform& pos, const PosParties& parties, const PosConfig& cfg,
                   PosState& state, const PosSession& session, const std::vector<std::string>& goods);

// Steps (i) to (iv) with billing split between POS owner and charging
// provider. reuse_token replays the previously presented token.
bool purchase_sep_duties(World& w, Platform& device, Platform& pos, const PosParties& parties, const PosConfig& cfg,
                         PosState& state, const std::vector<std::string>& goods, bool reuse_token);

// Fresh pseudonym batch from the POS's PCA; the old certificates simply expire.
void rotate_pos_pseudonym(World& w, Platform& pos, const std::string& pos_pca);

}  // namespace tcsim
