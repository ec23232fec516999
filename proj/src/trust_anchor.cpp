#include "tcsim/trust_anchor.hpp"

#include "tcsim/error.hpp"

namespace tcsim {

namespace {

void check_index(PcrIndex index) {
  if (index >= kPcrCount) throw Error(Errc::pcr_index_out_of_range, std::to_string(index));
}

}  // namespace

const Digest160& PcrBank::read(PcrIndex index) const {
  check_index(index);
  return registers_[index];
}

void PcrBank::extend(PcrIndex index, const Digest160& measurement) {
  check_index(index);
  registers_[index] = extend_value(registers_[index], measurement);
}

Digest160 extend_value(const Digest160& old, const Digest160& measurement) {
  Bytes buf(old.bytes().begin(), old.bytes().end());
  buf.insert(buf.end(), measurement.bytes().begin(), measurement.bytes().end());
  return hash160(buf);
}

Bytes ek_certificate_tbs(const EkCertificate& cert) {
  return Encoder("ek-certificate/1")
      .put(cert.ek_public.scheme_id)
      .put(cert.ek_public.bytes)
      .put(cert.model)
      .put(cert.manufacturer)
      .bytes();
}

bool verify_ek_certificate(const EkCertificate& cert, const PublicKey& manufacturer_root) {
  return verify(manufacturer_root, ek_certificate_tbs(cert), cert.signature);
}

Bytes quote_tbs(std::span<const PcrIndex> selection, std::span<const Digest160> values, BytesView nonce) {
  Encoder enc("quote/1");
  enc.put_u64(selection.size());
  for (auto i : selection) enc.put_u64(i);
  enc.put_u64(values.size());
  for (const auto& v : values) enc.put(v.view());
  enc.put(nonce);
  return std::move(enc).bytes();
}

bool verify_quote_signature(const Quote& quote, const PublicKey& aik_public) {
  if (quote.pcr_selection.size() != quote.pcr_values.size()) return false;
  return verify(aik_public, quote_tbs(quote.pcr_selection, quote.pcr_values, quote.nonce), quote.signature);
}

bool AccessPolicy::satisfied_by(const PcrBank& bank) const {
  for (const auto& [index, value] : required)
    if (bank.read(index) != value) return false;
  return true;
}

AccessPolicy AccessPolicy::from_current(const PcrBank& bank, std::span<const PcrIndex> registers) {
  AccessPolicy p;
  for (auto i : registers) p.required.emplace_back(i, bank.read(i));
  return p;
}

Bytes voucher_tbs(std::string_view id, std::uint64_t value) {
  return Encoder("voucher/1").put(id).put_u64(value).bytes();
}

Bytes ek_liveness_tbs(BytesView challenge) { return Encoder("ek-liveness/1").put(challenge).bytes(); }

Voucher issue_voucher(const KeyPair& authority, std::string id, std::uint64_t value) {
  Voucher v{std::move(id), value, {}};
  v.signature = sign(authority, voucher_tbs(v.id, v.value));
  return v;
}

TrustAnchor::TrustAnchor(KeyPair ek, EkCertificate ek_certificate)
    : ek_(std::move(ek)), ek_certificate_(std::move(ek_certificate)) {}

Signature TrustAnchor::ek_challenge_response(BytesView challenge) const {
  return sign(ek_, ek_liveness_tbs(challenge));
}

std::vector<AikRecord> TrustAnchor::create_aik_batch(std::size_t count, Rng& rng) {
  if (count < 2) throw Error(Errc::batch_too_small, std::to_string(count));
  const BatchId batch = next_batch_++;
  std::vector<AikRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    KeyPair key = keygen(rng);
    AikRecord rec{next_handle_++, key.public_key(), AikUsage::unused, batch};
    aiks_.emplace(rec.handle, AikEntry{rec, std::move(key)});
    out.push_back(rec);
  }
  return out;
}

const AikRecord& TrustAnchor::aik(AikHandle handle) const {
  auto it = aiks_.find(handle);
  if (it == aiks_.end()) throw Error(Errc::aik_unknown, std::to_string(handle));
  return it->second.record;
}

TrustAnchor::AikEntry& TrustAnchor::find_aik(AikHandle handle) {
  auto it = aiks_.find(handle);
  if (it == aiks_.end()) throw Error(Errc::aik_unknown, std::to_string(handle));
  return it->second;
}

TrustAnchor::AikEntry& TrustAnchor::take_unused_aik(AikHandle handle) {
  auto& entry = find_aik(handle);
  if (entry.record.usage == AikUsage::used) throw Error(Errc::aik_already_used, std::to_string(handle));
  return entry;
}

Quote TrustAnchor::quote(AikHandle handle, std::span<const PcrIndex> selection, BytesView nonce) {
  auto& entry = take_unused_aik(handle);
  Quote q;
  q.pcr_selection.assign(selection.begin(), selection.end());
  for (auto i : selection) q.pcr_values.push_back(pcrs_.read(i));
  q.nonce.assign(nonce.begin(), nonce.end());
  q.signature = sign(entry.key, quote_tbs(q.pcr_selection, q.pcr_values, q.nonce));
  entry.record.usage = AikUsage::used;
  return q;
}

Signature TrustAnchor::sign_replenishment(AikHandle handle, BytesView request) {
  auto& entry = take_unused_aik(handle);
  auto sig = sign(entry.key, request);
  entry.record.usage = AikUsage::used;
  return sig;
}

void TrustAnchor::create_counter_slot(const SlotId& id, std::uint64_t initial, AccessPolicy policy,
                                      PublicKey voucher_authority) {
  if (counters_.contains(id) || sealed_.contains(id)) throw Error(Errc::slot_exists, id);
  counters_.emplace(id, CounterSlot{initial, std::move(policy), std::move(voucher_authority), {}});
}

TrustAnchor::CounterSlot& TrustAnchor::counter(const SlotId& id) {
  auto it = counters_.find(id);
  if (it == counters_.end()) throw Error(Errc::slot_unknown, id);
  if (!it->second.policy.satisfied_by(pcrs_)) throw Error(Errc::sealed_against_state, id);
  return it->second;
}

const TrustAnchor::CounterSlot& TrustAnchor::counter(const SlotId& id) const {
  auto it = counters_.find(id);
  if (it == counters_.end()) throw Error(Errc::slot_unknown, id);
  if (!it->second.policy.satisfied_by(pcrs_)) throw Error(Errc::sealed_against_state, id);
  return it->second;
}

std::uint64_t TrustAnchor::slot_read(const SlotId& id) const { return counter(id).value; }

std::uint64_t TrustAnchor::slot_decrement(const SlotId& id, std::uint64_t amount) {
  auto& slot = counter(id);
  if (amount > slot.value) throw Error(Errc::insufficient_balance, id);
  slot.value -= amount;
  return slot.value;
}

std::uint64_t TrustAnchor::slot_redeem(const SlotId& id, const Voucher& voucher) {
  auto& slot = counter(id);
  if (!verify(slot.voucher_authority, voucher_tbs(voucher.id, voucher.value), voucher.signature))
    throw Error(Errc::bad_voucher, voucher.id);
  if (slot.redeemed.contains(voucher.id)) throw Error(Errc::voucher_replay, voucher.id);
  slot.redeemed.insert(voucher.id);
  slot.value += voucher.value;
  return slot.value;
}

void TrustAnchor::seal_key(const SlotId& id, KeyPair key, AccessPolicy policy) {
  if (counters_.contains(id) || sealed_.contains(id)) throw Error(Errc::slot_exists, id);
  sealed_.emplace(id, SealedKey{std::move(key), std::move(policy)});
}

Signature TrustAnchor::sealed_sign(const SlotId& id, BytesView message) const {
  auto it = sealed_.find(id);
  if (it == sealed_.end()) throw Error(Errc::slot_unknown, id);
  if (!it->second.policy.satisfied_by(pcrs_)) throw Error(Errc::sealed_against_state, id);
  return sign(it->second.key, message);
}

Manufacturer::Manufacturer(std::string name, Rng& rng) : name_(std::move(name)), root_(keygen(rng)) {}

TrustAnchor Manufacturer::manufacture(const std::string& model, Rng& rng) const {
  KeyPair ek = keygen(rng);
  EkCertificate cert{ek.public_key(), model, name_, {}};
  cert.signature = sign(root_, ek_certificate_tbs(cert));
  return TrustAnchor(std::move(ek), std::move(cert));
}

}  // namespace tcsim
