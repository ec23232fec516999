#include "tcsim/error.hpp"

namespace tcsim {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::pcr_index_out_of_range: return "pcr-index-out-of-range";
    case Errc::batch_too_small: return "batch-too-small";
    case Errc::aik_unknown: return "aik-unknown";
    case Errc::aik_already_used: return "aik-already-used";
    case Errc::sealed_against_state: return "sealed-against-state";
    case Errc::insufficient_balance: return "insufficient-balance";
    case Errc::slot_unknown: return "slot-unknown";
    case Errc::slot_exists: return "slot-exists";
    case Errc::bad_voucher: return "bad-voucher";
    case Errc::voucher_replay: return "voucher-replay";
    case Errc::empty_chain: return "empty-chain";
    case Errc::unknown_component: return "unknown-component";
    case Errc::log_index_out_of_range: return "log-index-out-of-range";
    case Errc::untrusted_ek: return "untrusted-ek";
    case Errc::ek_liveness_failed: return "ek-liveness-failed";
    case Errc::replenish_replay: return "replenish-replay";
    case Errc::replenish_rejected: return "replenish-rejected";
    case Errc::unknown_party: return "unknown-party";
    case Errc::unknown_identity: return "unknown-identity";
    case Errc::pool_exhausted: return "pool-exhausted";
    case Errc::component_not_measured: return "component-not-measured";
    case Errc::malformed_message: return "malformed-message";
    case Errc::invalid_structure: return "invalid-structure";
    case Errc::config_error: return "config-error";
  }
  return "unknown-error";
}

}  // namespace tcsim
