#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcsim {

// Protocol-level failure codes. The string forms are what appears in
// transcripts and reports.
enum class Errc {
  pcr_index_out_of_range,
  batch_too_small,
  aik_unknown,
  aik_already_used,
  sealed_against_state,
  insufficient_balance,
  slot_unknown,
  slot_exists,
  bad_voucher,
  voucher_replay,
  empty_chain,
  unknown_component,
  log_index_out_of_range,
  untrusted_ek,
  ek_liveness_failed,
  replenish_replay,
  replenish_rejected,
  unknown_party,
  unknown_identity,
  pool_exhausted,
  component_not_measured,
  malformed_message,
  invalid_structure,
  config_error,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  explicit Error(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tcsim
