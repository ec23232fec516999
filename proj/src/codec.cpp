#include "tcsim/codec.hpp"

#include <charconv>

#include <json.hpp>

#include "tcsim/error.hpp"

namespace tcsim::codec {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::malformed_message, what); }

json parse(const std::string& s, const char* what) {
  try {
    return json::parse(s);
  } catch (const json::exception&) {
    bad(what);
  }
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception&) {
    bad(what);
  } catch (const std::invalid_argument&) {
    bad(what);
  }
}

json key_json(const PublicKey& k) { return {{"scheme", k.scheme_id}, {"key", k.hex()}}; }
PublicKey key_from(const json& j) {
  return PublicKey{j.at("scheme").get<std::string>(), from_hex(j.at("key").get<std::string>())};
}

json cert_json(const AikCertificate& c) {
  return {{"aik", key_json(c.aik_public)}, {"domain", c.domain_id}, {"valid_from", c.valid_from},
          {"valid_until", c.valid_until},   {"hash", c.hash_id},      {"sig", to_hex(c.pca_signature.bytes)}};
}
AikCertificate cert_from(const json& j) {
  AikCertificate c;
  c.aik_public = key_from(j.at("aik"));
  c.domain_id = j.at("domain").get<std::string>();
  c.valid_from = j.at("valid_from").get<Tick>();
  c.valid_until = j.at("valid_until").get<Tick>();
  c.hash_id = j.at("hash").get<std::string>();
  c.pca_signature.bytes = from_hex(j.at("sig").get<std::string>());
  return c;
}

}  // namespace

std::string encode(const PublicKey& k) { return key_json(k).dump(); }
PublicKey decode_public_key(const std::string& s) {
  return guarded("public key", [&] { return key_from(parse(s, "public key")); });
}

std::string encode(const Signature& s) { return to_hex(s.bytes); }
Signature decode_signature(const std::string& s) { return Signature{decode_hex(s)}; }

std::string encode(const AikCertificate& c) { return cert_json(c).dump(); }
AikCertificate decode_certificate(const std::string& s) {
  return guarded("aik certificate", [&] { return cert_from(parse(s, "aik certificate")); });
}

std::string encode(const EkCertificate& c) {
  return json{{"ek", key_json(c.ek_public)},
              {"model", c.model},
              {"manufacturer", c.manufacturer},
              {"sig", to_hex(c.signature.bytes)}}
      .dump();
}
EkCertificate decode_ek_certificate(const std::string& s) {
  return guarded("ek certificate", [&] {
    auto j = parse(s, "ek certificate");
    return EkCertificate{key_from(j.at("ek")), j.at("model").get<std::string>(),
                         j.at("manufacturer").get<std::string>(), Signature{from_hex(j.at("sig").get<std::string>())}};
  });
}

std::string encode(const Quote& q) {
  json values = json::array();
  for (const auto& v : q.pcr_values) values.push_back(v.hex());
  return json{{"selection", q.pcr_selection}, {"values", values}, {"nonce", to_hex(q.nonce)},
              {"sig", to_hex(q.signature.bytes)}}
      .dump();
}
Quote decode_quote(const std::string& s) {
  return guarded("quote", [&] {
    auto j = parse(s, "quote");
    Quote q;
    q.pcr_selection = j.at("selection").get<std::vector<PcrIndex>>();
    for (const auto& v : j.at("values")) q.pcr_values.push_back(Digest160::from_hex(v.get<std::string>()));
    q.nonce = from_hex(j.at("nonce").get<std::string>());
    q.signature.bytes = from_hex(j.at("sig").get<std::string>());
    return q;
  });
}

std::string encode(const MeasurementLog& log) {
  json entries = json::array();
  for (const auto& e : log.entries)
    entries.push_back({{"component", e.component}, {"digest", e.measurement.hex()}, {"pcr", e.pcr}});
  return entries.dump();
}
MeasurementLog decode_log(const std::string& s) {
  return guarded("measurement log", [&] {
    MeasurementLog log;
    for (const auto& e : parse(s, "measurement log"))
      log.entries.push_back({e.at("component").get<std::string>(),
                             Digest160::from_hex(e.at("digest").get<std::string>()), e.at("pcr").get<PcrIndex>()});
    return log;
  });
}

std::string encode(const Voucher& v) {
  return json{{"id", v.id}, {"value", v.value}, {"sig", to_hex(v.signature.bytes)}}.dump();
}
Voucher decode_voucher(const std::string& s) {
  return guarded("voucher", [&] {
    auto j = parse(s, "voucher");
    return Voucher{j.at("id").get<std::string>(), j.at("value").get<std::uint64_t>(),
                   Signature{from_hex(j.at("sig").get<std::string>())}};
  });
}

std::string encode_selection(const std::vector<PcrIndex>& selection) { return json(selection).dump(); }
std::vector<PcrIndex> decode_selection(const std::string& s) {
  return guarded("pcr selection", [&] { return parse(s, "pcr selection").get<std::vector<PcrIndex>>(); });
}

std::string encode_keys(const std::vector<PublicKey>& keys) {
  json out = json::array();
  for (const auto& k : keys) out.push_back(key_json(k));
  return out.dump();
}
std::vector<PublicKey> decode_keys(const std::string& s) {
  return guarded("key list", [&] {
    std::vector<PublicKey> out;
    for (const auto& k : parse(s, "key list")) out.push_back(key_from(k));
    return out;
  });
}

std::string encode_certificates(const std::vector<AikCertificate>& certs) {
  json out = json::array();
  for (const auto& c : certs) out.push_back(cert_json(c));
  return out.dump();
}
std::vector<AikCertificate> decode_certificates(const std::string& s) {
  return guarded("certificate list", [&] {
    std::vector<AikCertificate> out;
    for (const auto& c : parse(s, "certificate list")) out.push_back(cert_from(c));
    return out;
  });
}

Bytes decode_hex(const std::string& s) {
  try {
    return from_hex(s);
  } catch (const std::invalid_argument&) {
    bad("hex field");
  }
}

std::uint64_t decode_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) bad("integer field");
  return v;
}

}  // namespace tcsim::codec
