#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcsim/bytes.hpp"
#include "tcsim/crypto.hpp"

namespace tcsim {

using PcrIndex = std::size_t;
inline constexpr std::size_t kPcrCount = 24;
// Registers 0-7 hold the boot chain; 8 and above are free for applications.
inline constexpr PcrIndex kBootPcr = 0;

// Register bank. The only mutation besides platform reset is extend.
class PcrBank {
 public:
  const Digest160& read(PcrIndex index) const;
  void extend(PcrIndex index, const Digest160& measurement);
  void reset() { registers_.fill(Digest160{}); }

  bool operator==(const PcrBank&) const = default;

 private:
  std::array<Digest160, kPcrCount> registers_{};
};

// The extension step itself: SHA-1(old || measurement).
Digest160 extend_value(const Digest160& old, const Digest160& measurement);

// Manufacturer-signed statement over the endorsement key and device model.
struct EkCertificate {
  PublicKey ek_public;
  std::string model;
  std::string manufacturer;
  Signature signature;
};

Bytes ek_certificate_tbs(const EkCertificate& cert);
bool verify_ek_certificate(const EkCertificate& cert, const PublicKey& manufacturer_root);

// What the endorsement key signs to prove liveness.
Bytes ek_liveness_tbs(BytesView challenge);

using AikHandle = std::uint32_t;
using BatchId = std::uint32_t;

enum class AikUsage { unused, used };

// Public view of an attestation identity key; the private half stays inside
// the anchor.
struct AikRecord {
  AikHandle handle = 0;
  PublicKey public_key;
  AikUsage usage = AikUsage::unused;
  BatchId batch = 0;
};

struct Quote {
  std::vector<PcrIndex> pcr_selection;
  std::vector<Digest160> pcr_values;
  Bytes nonce;
  Signature signature;
};

// Exactly what an AIK signs for a quote.
Bytes quote_tbs(std::span<const PcrIndex> selection, std::span<const Digest160> values, BytesView nonce);
bool verify_quote_signature(const Quote& quote, const PublicKey& aik_public);

// Register values a shielded slot requires before it can be used.
struct AccessPolicy {
  std::vector<std::pair<PcrIndex, Digest160>> required;

  bool satisfied_by(const PcrBank& bank) const;
  // Policy matching the bank's current value of each listed register.
  static AccessPolicy from_current(const PcrBank& bank, std::span<const PcrIndex> registers);
};

// Signed authorisation to raise a counter slot.
struct Voucher {
  std::string id;
  std::uint64_t value = 0;
  Signature signature;
};

Bytes voucher_tbs(std::string_view id, std::uint64_t value);
Voucher issue_voucher(const KeyPair& authority, std::string id, std::uint64_t value);

using SlotId = std::string;

class TrustAnchor {
 public:
  TrustAnchor(KeyPair ek, EkCertificate ek_certificate);

  const PcrBank& pcrs() const { return pcrs_; }
  const Digest160& read_pcr(PcrIndex index) const { return pcrs_.read(index); }
  void extend(PcrIndex index, const Digest160& measurement) { pcrs_.extend(index, measurement); }
  // Platform reset: every register back to zero. Keys and storage persist.
  void reset() { pcrs_.reset(); }

  const EkCertificate& ek_certificate() const { return ek_certificate_; }
  // Proves liveness of this anchor's endorsement key.
  Signature ek_challenge_response(BytesView challenge) const;

  // Requires count >= 2; all keys share a fresh batch id.
  std::vector<AikRecord> create_aik_batch(std::size_t count, Rng& rng);
  const AikRecord& aik(AikHandle handle) const;
  bool aik_used(AikHandle handle) const { return aik(handle).usage == AikUsage::used; }

  // One-time: a successful quote consumes the AIK.
  Quote quote(AikHandle handle, std::span<const PcrIndex> selection, BytesView nonce);
  // Signs a replenishment request (new AIK public keys) and consumes the AIK.
  Signature sign_replenishment(AikHandle handle, BytesView request);

  void create_counter_slot(const SlotId& id, std::uint64_t initial, AccessPolicy policy,
                           PublicKey voucher_authority);
  std::uint64_t slot_read(const SlotId& id) const;
  std::uint64_t slot_decrement(const SlotId& id, std::uint64_t amount);
  std::uint64_t slot_redeem(const SlotId& id, const Voucher& voucher);

  // Key usable only while the registers match the policy.
  void seal_key(const SlotId& id, KeyPair key, AccessPolicy policy);
  Signature sealed_sign(const SlotId& id, BytesView message) const;

 private:
  struct AikEntry {
    AikRecord record;
    KeyPair key;
  };
  struct CounterSlot {
    std::uint64_t value;
    AccessPolicy policy;
    PublicKey voucher_authority;
    std::set<std::string> redeemed;
  };
  struct SealedKey {
    KeyPair key;
    AccessPolicy policy;
  };

  AikEntry& find_aik(AikHandle handle);
  AikEntry& take_unused_aik(AikHandle handle);
  CounterSlot& counter(const SlotId& id);
  const CounterSlot& counter(const SlotId& id) const;

  KeyPair ek_;
  EkCertificate ek_certificate_;
  PcrBank pcrs_;
  std::map<AikHandle, AikEntry> aiks_;
  AikHandle next_handle_ = 1;
  BatchId next_batch_ = 1;
  std::map<SlotId, CounterSlot> counters_;
  std::map<SlotId, SealedKey> sealed_;
};

// Issues endorsement identities for newly built anchors.
class Manufacturer {
 public:
  Manufacturer(std::string name, Rng& rng);

  const std::string& name() const { return name_; }
  const PublicKey& root() const { return root_.public_key(); }
  TrustAnchor manufacture(const std::string& model, Rng& rng) const;

 private:
  std::string name_;
  KeyPair root_;
};

}  // namespace tcsim
