#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tcsim/crypto.hpp"
#include "tcsim/scenarios.hpp"

namespace tcsim {
namespace {

using nlohmann::json;
using testing::code_of;

std::string sha256_hex(const std::string& text) { return to_hex(sha256(to_bytes(text))); }

json minimal_script() {
  return json::parse(R"({
    "schema": "tcsim-script/1",
    "name": "mini",
    "kind": "one-time-aik",
    "description": "one device, one service",
    "chains": {"phone": [["crtm", "c1"], ["os", "o1"]]},
    "roster": [
      {"id": "mno", "role": "mno"},
      {"id": "pca", "role": "pca", "pca_domain": "mini"},
      {"id": "svc", "role": "service"},
      {"id": "phone", "role": "device", "chain": "phone"}
    ],
    "config": {"batch_size": 4},
    "events": [
      {"op": "enroll", "device": "phone", "pca": "pca"},
      {"op": "authenticate", "device": "phone", "pca": "pca", "services": ["svc"], "count": 6}
    ],
    "assertions": ["all-auth-accepted", "tokens-unlinkable"]
  })");
}

TEST(Catalog, EveryScriptParses) {
  EXPECT_EQ(catalog_names().size(), 12u);
  for (const auto& n : catalog_names()) {
    auto s = catalog_script(n);
    EXPECT_EQ(s.name, n);
    EXPECT_GE(supported_attacks(s).size(), 5u);
  }
  EXPECT_EQ(code_of([] { catalog_script("no-such"); }), Errc::config_error);
}

TEST(Config, MergeOverridesOnlyKnownKeys) {
  auto merged = merge_config(default_config(), json{{"batch_size", 3}});
  EXPECT_EQ(merged["batch_size"], 3);
  EXPECT_EQ(merged["validity_ticks"], default_config()["validity_ticks"]);
  EXPECT_EQ(code_of([] { merge_config(default_config(), json{{"batchsize", 3}}); }), Errc::config_error);
  EXPECT_EQ(code_of([] { merge_config(default_config(), json{{"encryption", "yes"}}); }), Errc::config_error);
}

TEST(Config, VariantsParseByDefaultType) {
  EXPECT_EQ(parse_variant("encryption=false"), (std::pair<std::string, json>{"encryption", false}));
  EXPECT_EQ(parse_variant("batch_size=7").second, 7);
  EXPECT_EQ(parse_variant("billing=decentralised").second, "decentralised");
  EXPECT_EQ(code_of([] { parse_variant("batch_size=many"); }), Errc::config_error);
  EXPECT_EQ(code_of([] { parse_variant("nokey"); }), Errc::config_error);
  EXPECT_EQ(code_of([] { parse_variant("ghost=1"); }), Errc::config_error);
}

TEST(Script, MinimalScriptRuns) {
  auto s = parse_script(minimal_script());
  auto r = run_scenario(s, {});
  EXPECT_TRUE(r.report.passed()) << r.report.to_json().dump(2);
  EXPECT_EQ(r.transcript.events_of_kind("replenish").size(), 2u);
}

TEST(Script, ValidationRejectsBrokenScripts) {
  auto broken = [](auto edit) {
    auto doc = minimal_script();
    edit(doc);
    return code_of([&] { parse_script(doc); });
  };
  EXPECT_EQ(broken([](json& d) { d["schema"] = "tcsim-script/0"; }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["kind"] = "banking"; }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["roster"][0]["role"] = "wizard"; }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["roster"][3]["chain"] = "missing"; }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["events"][0]["op"] = "teleport"; }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["events"][1].erase("pca"); }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["events"][0]["device"] = "svc"; }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["assertions"].push_back("made-up"); }), Errc::config_error);
  EXPECT_EQ(broken([](json& d) { d["config"]["batch_size"] = 1; }), Errc::config_error);
}

TEST(Run, UnsupportedAttackRejectedBeforeRunning) {
  auto s = catalog_script("one-time-aik-auth");
  EXPECT_EQ(code_of([&] { run_scenario(s, {42, {"strip-ack"}, {}}); }), Errc::config_error);
  EXPECT_EQ(code_of([&] { run_scenario(s, {42, {}, {"nope=1"}}); }), Errc::config_error);
}

TEST(Run, SameSeedSameBytes) {
  for (const auto& n : catalog_names()) {
    auto s = catalog_script(n);
    auto a = run_scenario(s, {7, {}, {}});
    auto b = run_scenario(s, {7, {}, {}});
    EXPECT_EQ(a.jsonl, b.jsonl) << n;
    EXPECT_NE(a.jsonl, run_scenario(s, {8, {}, {}}).jsonl) << n;
  }
}

TEST(Run, EveryCatalogAttackDetected) {
  for (const auto& n : catalog_names()) {
    auto s = catalog_script(n);
    for (const auto& a : supported_attacks(s)) {
      auto r = run_scenario(s, {3, {a}, {}});
      EXPECT_TRUE(r.report.passed()) << n << " / " << a;
      bool saw = false;
      for (const auto& x : r.report.assertions)
        if (x.name == "attack-detected") saw = x.expected == true && x.observed;
      EXPECT_TRUE(saw) << n << " / " << a;
    }
  }
}

TEST(Report, JsonRoundTrip) {
  auto r = run_scenario(catalog_script("pos-fig4"), {}).report;
  auto back = Report::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_EQ(r.to_json()["schema"], kReportSchema);
  EXPECT_EQ(code_of([] { Report::from_json(json{{"schema", "other"}}); }), Errc::malformed_message);
}

TEST(Verify, RecheckMatchesLiveReport) {
  auto r = run_scenario(catalog_script("pos-sep-duties"), {});
  auto again = check_transcript(sim::parse_jsonl(r.jsonl), sha256_hex(r.jsonl));
  EXPECT_EQ(again.to_json(), r.report.to_json());
  EXPECT_EQ(r.report.transcript_sha256, sha256_hex(r.jsonl));
}

// Adding a goods field to a billing package in a saved transcript must turn
// the billing assertion red on re-verification.
TEST(Verify, EditedBillingPackageFails) {
  auto r = run_scenario(catalog_script("pos-sep-duties"), {});
  std::string edited;
  std::istringstream in(r.jsonl);
  bool done = false;
  for (std::string line; std::getline(in, line);) {
    auto j = json::parse(line);
    if (!done && j.value("type", "") == "message" && j.value("kind", "") == "billing-package") {
      j["fields"].push_back({{"name", "goods"}, {"label", "good"}, {"value", "cola"}, {"readers", json::array()}});
      done = true;
    }
    edited += j.dump() + "\n";
  }
  ASSERT_TRUE(done);
  auto rep = check_transcript(sim::parse_jsonl(edited), sha256_hex(edited));
  EXPECT_FALSE(rep.passed());
  bool billing_failed = false;
  for (const auto& a : rep.assertions)
    if (a.name == "billing-package-exact") billing_failed = !a.passed();
  EXPECT_TRUE(billing_failed);
}

TEST(Assertions, CatalogCoversEveryScriptAssertion) {
  std::set<std::string> known;
  for (const auto& a : assertion_catalog()) known.insert(a.name);
  for (const auto& n : catalog_names())
    for (const auto& a : catalog_script(n).doc["assertions"]) EXPECT_TRUE(known.count(a.get<std::string>())) << a;
}

}  // namespace
}  // namespace tcsim
