#pragma once

#include <string>
#include <vector>

#include "tcsim/attestation.hpp"
#include "tcsim/certificate.hpp"
#include "tcsim/measured_boot.hpp"
#include "tcsim/trust_anchor.hpp"

// Text encodings for protocol objects carried in message fields. Every
// decoder throws malformed-message on bad input.
namespace tcsim::codec {

std::string encode(const PublicKey& k);
PublicKey decode_public_key(const std::string& s);

std::string encode(const Signature& s);
Signature decode_signature(const std::string& s);

std::string encode(const AikCertificate& c);
AikCertificate decode_certificate(const std::string& s);

std::string encode(const EkCertificate& c);
EkCertificate decode_ek_certificate(const std::string& s);

std::string encode(const Quote& q);
Quote decode_quote(const std::string& s);

std::string encode(const MeasurementLog& log);
MeasurementLog decode_log(const std::string& s);

std::string encode(const Voucher& v);
Voucher decode_voucher(const std::string& s);

std::string encode_selection(const std::vector<PcrIndex>& selection);
std::vector<PcrIndex> decode_selection(const std::string& s);

std::string encode_keys(const std::vector<PublicKey>& keys);
std::vector<PublicKey> decode_keys(const std::string& s);

std::string encode_certificates(const std::vector<AikCertificate>& certs);
std::vector<AikCertificate> decode_certificates(const std::string& s);

Bytes decode_hex(const std::string& s);
std::uint64_t decode_u64(const std::string& s);

}  // namespace tcsim::codec
