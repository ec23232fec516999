#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tcsim/domain_restriction.hpp"

namespace tcsim {
namespace {

using testing::code_of;

TEST(Registry, DecisionTable) {
  SubdomainRegistry bound(RegistryMode::bound);
  bound.bind("imsi-1", "fp-a");
  EXPECT_EQ(bound.decide("imsi-1", "fp-a", false), Admission::attestation_failed);
  EXPECT_EQ(bound.decide("imsi-1", "fp-b", true), Admission::credential_inconsistency);
  EXPECT_EQ(bound.request("imsi-1", "fp-a", true), Admission::admitted);
  EXPECT_TRUE(bound.is_admitted("imsi-1", "fp-a"));
  EXPECT_FALSE(bound.is_admitted("imsi-1", "fp-b"));

  SubdomainRegistry open(RegistryMode::unbound);
  EXPECT_EQ(open.request("imsi-1", "fp-b", true), Admission::admitted);
  EXPECT_EQ(open.request("imsi-1", "fp-a", true), Admission::clone_conflict);
  EXPECT_EQ(open.request("imsi-1", "fp-b", true), Admission::admitted);
  EXPECT_EQ(open.request("imsi-2", "fp-c", false), Admission::attestation_failed);
}

TEST(Registry, ModeNames) {
  EXPECT_EQ(registry_mode_from_string("bound"), RegistryMode::bound);
  EXPECT_EQ(registry_mode_from_string("unbound"), RegistryMode::unbound);
  EXPECT_FALSE(registry_mode_from_string("loose").has_value());
  EXPECT_EQ(to_string(Admission::clone_conflict), "clone-conflict");
}

// Property over random request sequences: bound mode only admits bound pairs,
// unbound admits exactly the first accepted fingerprint per identity, and
// every pair bound mode admits is one unbound mode would admit as well.
TEST(RegistryProperty, BoundNeverAdmitsUnboundPairs) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(seed);
    SubdomainRegistry bound(RegistryMode::bound), open(RegistryMode::unbound);
    std::set<std::pair<std::string, std::string>> bindings;
    for (int i = 0; i < 3; ++i) {
      auto id = "imsi-" + std::to_string(i);
      auto fp = "fp-" + std::to_string(i) + "-0";
      bound.bind(id, fp);
      bindings.insert({id, fp});
    }
    std::map<std::string, std::string> first;
    for (int step = 0; step < 20; ++step) {
      auto id = "imsi-" + std::to_string(rng.uniform(3));
      auto fp = "fp-" + id.substr(5) + "-" + std::to_string(rng.uniform(3));
      bool accepted = rng.uniform(4) != 0;
      auto b = bound.request(id, fp, accepted);
      auto u = open.request(id, fp, accepted);
      if (b == Admission::admitted) EXPECT_TRUE(bindings.count({id, fp}));
      if (accepted && !first.count(id)) first[id] = fp;
      EXPECT_EQ(u == Admission::admitted, accepted && first[id] == fp);
    }
  }
}

TEST(Policy, FirstMatchingRuleOverridesBase) {
  FeaturePolicy p{{{"camera", Feature::enabled}, {"mms", Feature::enabled}},
                  {{"zone-a", {{"camera", Feature::disabled}}}, {"zone-a", {{"mms", Feature::disabled}}}}};
  EXPECT_EQ(describe(effective_features(p, "zone-a")), "camera=disabled,mms=enabled");
  EXPECT_EQ(describe(effective_features(p, "elsewhere")), "camera=enabled,mms=enabled");
}

TEST(Policy, UnenforcedWithoutEnforcerOrAttestation) {
  FeaturePolicy p{{{"camera", Feature::enabled}}, {}};
  EXPECT_FALSE(apply_policy(false, true, p, "x").has_value());
  EXPECT_FALSE(apply_policy(true, false, p, "x").has_value());
  EXPECT_TRUE(apply_policy(true, true, p, "x").has_value());
}

TEST(Policy, ParseRejectsUnknownStates) {
  auto ok = parse_feature_policy(nlohmann::json::parse(
      R"({"features": {"camera": "enabled"}, "location_rules": [{"cell": "c", "overrides": {"camera": "disabled"}}]})"));
  EXPECT_EQ(ok.location_rules.size(), 1u);
  EXPECT_EQ(code_of([] { parse_feature_policy(nlohmann::json::parse(R"({"features": {"camera": "maybe"}})")); }),
            Errc::config_error);
  EXPECT_EQ(code_of([] { parse_feature_policy(nlohmann::json::parse(R"({"rules": []})")); }), Errc::config_error);
}

// Operator, restriction PCA, a genuine phone and a clone sharing c_MNO.
struct CloneWorld {
  explicit CloneWorld(std::uint64_t seed = 42) : w(seed, {}), mno("mno") {
    for (auto [id, role] : {std::pair{"mno", "mno"}, {"genuine", "device"}, {"clone", "device"}}) w.add_party(id, role);
    w.add_channels("mno");
    w.register_chain("phone", make_chain({{"crtm", "c1"}, {"os", "o1"}, {"enforcer", "e1"}, {"app", "a1"}}));
    w.add_pca("mno", "restricted");
    for (const auto* id : {"genuine", "clone"}) enroll(w, w.add_platform(id, "phone"), "mno", 10);
    mno.add_subscriber("imsi-1", w.party_key("subscriber").public_key());
  }
  GenericCredential cred() { return {"imsi-1", "mno", w.party_key("subscriber")}; }

  World w;
  Mno mno;
};

TEST(NetworkAccess, SharedCredentialAdmitsBothCopies) {
  CloneWorld c;
  EXPECT_EQ(network_access(c.w, c.mno, "genuine", c.cred()), "imsi-1");
  EXPECT_EQ(network_access(c.w, c.mno, "clone", c.cred()), "imsi-1");
}

TEST(NetworkAccess, WrongKeyAndUnknownIdentityDenied) {
  CloneWorld c;
  GenericCredential forged{"imsi-1", "mno", c.w.party_key("someone-else")};
  EXPECT_FALSE(network_access(c.w, c.mno, "clone", forged).has_value());
  GenericCredential stranger{"imsi-9", "mno", c.w.party_key("subscriber")};
  EXPECT_FALSE(network_access(c.w, c.mno, "clone", stranger).has_value());
  auto t = c.w.net.finish({});
  auto sessions = t.events_of_kind("network-session");
  ASSERT_EQ(sessions.size(), 2u);
  EXPECT_EQ(sessions[0]->attr("reason"), "bad-signature");
  EXPECT_EQ(sessions[1]->attr("reason"), "unknown-identity");
}

TEST(Subdomain, BoundModeRejectsCloneEvenWhenFirst) {
  CloneWorld c;
  SubdomainRegistry reg(RegistryMode::bound);
  authority_bind(c.w, "mno", reg, c.w.platform("genuine"), "imsi-1", "mno");
  EXPECT_EQ(request_subdomain(c.w, "mno", reg, c.w.platform("clone"), "imsi-1", "mno"),
            Admission::credential_inconsistency);
  EXPECT_EQ(request_subdomain(c.w, "mno", reg, c.w.platform("genuine"), "imsi-1", "mno"), Admission::admitted);
}

TEST(Subdomain, UnboundModeAdmitsWhoeverComesFirst) {
  CloneWorld c;
  SubdomainRegistry reg(RegistryMode::unbound);
  EXPECT_EQ(request_subdomain(c.w, "mno", reg, c.w.platform("clone"), "imsi-1", "mno"), Admission::admitted);
  EXPECT_EQ(request_subdomain(c.w, "mno", reg, c.w.platform("genuine"), "imsi-1", "mno"), Admission::clone_conflict);
}

TEST(Subdomain, TamperedPlatformFailsAttestation) {
  CloneWorld c;
  auto& g = c.w.platform("genuine");
  g.boot_chain(tamper(g.chain, "app", to_bytes("a1-patched")));
  SubdomainRegistry reg(RegistryMode::unbound);
  EXPECT_EQ(request_subdomain(c.w, "mno", reg, g, "imsi-1", "mno"), Admission::attestation_failed);
}

TEST(Subdomain, BindingCoversTheNextCredentialUsed) {
  CloneWorld c;
  auto& g = c.w.platform("genuine");
  auto before = g.wallets["mno"].peek_for_service();
  ASSERT_TRUE(before.has_value());
  SubdomainRegistry reg(RegistryMode::bound);
  authority_bind(c.w, "mno", reg, g, "imsi-1", "mno");
  auto t = c.w.net.finish({});
  ASSERT_EQ(t.events_of_kind("binding").size(), 1u);
  EXPECT_EQ(t.events_of_kind("binding")[0]->attr("fingerprint"), trust_fingerprint(before->certificate));
}

TEST(PushPolicy, EnforcedOnlyWhenEnforcerIntact) {
  CloneWorld c;
  FeaturePolicy p{{{"camera", Feature::enabled}}, {{"lab", {{"camera", Feature::disabled}}}}};
  auto good = push_policy(c.w, "mno", c.w.platform("genuine"), "mno", p, "lab", kMobileChannel);
  ASSERT_TRUE(good.has_value());
  EXPECT_EQ(describe(*good), "camera=disabled");

  auto& cl = c.w.platform("clone");
  cl.boot_chain(tamper(cl.chain, "enforcer", to_bytes("e1-noop")));
  EXPECT_FALSE(push_policy(c.w, "mno", cl, "mno", p, "lab", kMobileChannel).has_value());
  auto t = c.w.net.finish({});
  EXPECT_EQ(t.events_of_kind("policy-applied").back()->attr("features"), "unenforced");
}

TEST(PushPolicy, MissingEnforcerComponentIsUnenforced) {
  World w(1, {});
  w.add_party("mno", "mno");
  w.add_party("phone", "device");
  w.add_channels("mno");
  w.register_chain("plain", make_chain({{"crtm", "c1"}, {"os", "o1"}}));
  w.add_pca("mno", "restricted");
  auto& p = w.add_platform("phone", "plain");
  enroll(w, p, "mno", 4);
  FeaturePolicy policy{{{"camera", Feature::enabled}}, {}};
  EXPECT_FALSE(push_policy(w, "mno", p, "mno", policy, "x", kMobileChannel).has_value());
}

}  // namespace
}  // namespace tcsim
