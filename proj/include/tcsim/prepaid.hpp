#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcsim/protocol.hpp"

namespace tcsim {

inline constexpr const char* kVsimComponent = "vsim";
inline constexpr const char* kPpcComponent = "ppc";
inline constexpr const char* kBalanceSlot = "ppc-balance";
inline constexpr const char* kPpcKeySlot = "ppc-key";

// Reserved IMSIs shared by the whole prepaid group.
struct PpImsiPool {
  std::vector<std::string> imsis;
  std::string owner;
};

// Operator side of the prepaid service. Keeps no per-device ledger.
class PrepaidOperator {
 public:
  PrepaidOperator(std::string id, PpImsiPool pool, std::map<std::string, std::uint64_t> tariffs, KeyPair voucher_key,
                  PublicKey group_key);

  const std::string& id() const { return id_; }
  const PpImsiPool& pool() const { return pool_; }
  bool in_pool(const std::string& imsi) const;
  bool active(const std::string& imsi) const { return active_.count(imsi) != 0; }
  void activate(const std::string& imsi) { active_.insert(imsi); }
  void release(const std::string& imsi) { active_.erase(imsi); }

  // Throws config-error for an unknown service.
  std::uint64_t cost(const std::string& service, std::uint64_t units) const;
  Voucher issue_voucher(std::uint64_t value);
  const PublicKey& voucher_authority() const { return voucher_key_.public_key(); }
  const PublicKey& group_key() const { return group_key_; }

 private:
  std::string id_;
  PpImsiPool pool_;
  std::map<std::string, std::uint64_t> tariffs_;
  KeyPair voucher_key_;
  PublicKey group_key_;
  std::set<std::string> active_;
  std::uint64_t next_voucher_ = 1;
};

// What the ppC signs: "balance >= cost" bound to the attestation nonce.
Bytes balance_statement_tbs(BytesView nonce, std::uint64_t cost, bool sufficient);

// Installs the ppC: balance slot and group key, both sealed to the honest
// boot-register value of the device's reference chain.
void install_prepaid(World& w, Platform& device, const PrepaidOperator& op, KeyPair group_key,
                     std::uint64_t initial_balance);

// Picks uniformly from the pool, retrying on busy IMSIs up to pool size.
// Returns the IMSI of the session, or nullopt when the pool is exhausted.
std::optional<std::string> vsim_logon(World& w, Platform& device, PrepaidOperator& op);

enum class PrepaidOutcome { granted, insufficient_balance, attestation_rejected, bad_statement };
std::string_view to_string(PrepaidOutcome o);

PrepaidOutcome prepaid_service_request(World& w, Platform& device, PrepaidOperator& op, const std::string& pca,
                                       const std::string& service, std::uint64_t units);

struct TopUpResult {
  Voucher voucher;
  std::optional<std::uint64_t> balance;  // nullopt when the device rejected it
};

TopUpResult top_up(World& w, Platform& device, PrepaidOperator& op, std::uint64_t value);
// Presents an already redeemed voucher again; expected outcome voucher-replay.
std::optional<std::uint64_t> redeem_again(World& w, Platform& device, const std::string& op_id, const Voucher& v);

}  // namespace tcsim
