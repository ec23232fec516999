#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tcsim/sim.hpp"

namespace tcsim::sim {
namespace {

using testing::code_of;

Field f(std::string name, Label label, std::string value, std::vector<std::string> readers = {}) {
  return Field{std::move(name), label, std::move(value), std::move(readers)};
}

Message msg(std::string from, std::string to, std::string channel, bool encrypted, std::vector<Field> fields,
            std::string kind = "test") {
  Message m;
  m.sender = std::move(from);
  m.receiver = std::move(to);
  m.channel = std::move(channel);
  m.kind = std::move(kind);
  m.encrypted = encrypted;
  m.fields = std::move(fields);
  return m;
}

struct Net : ::testing::Test {
  Net() {
    for (auto [id, role] : {std::pair{"phone", "device"}, {"mno", "mno"}, {"pos", "pos"}, {"shop", "vendor"}})
      net.add_party(id, role);
    net.add_channel({"mobile", ChannelKind::mobile_network, "mno"});
    net.add_channel({"short-range", ChannelKind::short_range, ""});
  }
  Network net;
};

TEST_F(Net, PlaintextMobileMessageFeedsCarrier) {
  net.deliver(msg("phone", "shop", "mobile", false, {f("goods", Label::good, "cola")}));
  auto t = net.finish({});
  EXPECT_EQ(knowledge_query(t, "mno", "good"), std::set<std::string>{"cola"});
  EXPECT_EQ(knowledge_query(t, "shop", "goods"), std::set<std::string>{"cola"});
  ASSERT_EQ(t.carrier_views["mno"].size(), 1u);
  EXPECT_EQ(t.carrier_views["mno"][0].field_names, std::vector<std::string>{"goods"});
}

TEST_F(Net, EnvelopedMobileMessageHidesFieldsFromCarrier) {
  net.deliver(msg("phone", "shop", "mobile", true, {f("goods", Label::good, "cola")}));
  auto t = net.finish({});
  EXPECT_TRUE(knowledge_query(t, "mno", "good").empty());
  EXPECT_EQ(knowledge_query(t, "shop", "good"), std::set<std::string>{"cola"});
  ASSERT_EQ(t.carrier_views["mno"].size(), 1u);
  const auto& rec = t.carrier_views["mno"][0];
  EXPECT_TRUE(rec.field_names.empty());
  EXPECT_EQ(rec.src, "phone");
  EXPECT_EQ(rec.dst, "shop");
}

TEST_F(Net, ShortRangeNeverReachesCarrier) {
  net.deliver(msg("pos", "phone", "short-range", false, {f("price", Label::price, "150")}));
  auto t = net.finish({});
  EXPECT_TRUE(t.carrier_views["mno"].empty());
  EXPECT_TRUE(knowledge_query(t, "mno", "price").empty());
  EXPECT_EQ(knowledge_query(t, "phone", "price"), std::set<std::string>{"150"});
}

TEST_F(Net, SealedFieldReadableOnlyByNamedReader) {
  net.deliver(msg("phone", "mno", "mobile", true,
                  {f("goods", Label::good, "cola", {"shop"}), f("price", Label::price, "150")}));
  auto t = net.finish({});
  EXPECT_TRUE(knowledge_query(t, "mno", "good").empty());
  EXPECT_EQ(knowledge_query(t, "mno", "price"), std::set<std::string>{"150"});
}

TEST_F(Net, SenderLearnsNothingBySending) {
  net.deliver(msg("phone", "shop", "mobile", true, {f("goods", Label::good, "cola")}));
  EXPECT_TRUE(net.knowledge("phone").empty());
}

TEST_F(Net, TicksAdvanceOnePerDeliveredMessage) {
  EXPECT_EQ(net.now(), 0u);
  auto a = net.deliver(msg("phone", "shop", "mobile", true, {}));
  auto b = net.deliver(msg("shop", "phone", "mobile", true, {}));
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->tick, 0u);
  EXPECT_EQ(b->tick, 1u);
  EXPECT_LT(a->id, b->id);
  net.annotate("note", "phone");
  EXPECT_EQ(net.now(), 2u);
  net.idle(5);
  EXPECT_EQ(net.now(), 7u);
}

TEST_F(Net, UnknownPartyOrChannelRejected) {
  EXPECT_EQ(code_of([&] { net.deliver(msg("ghost", "shop", "mobile", true, {})); }), Errc::unknown_party);
  EXPECT_EQ(code_of([&] { net.deliver(msg("phone", "ghost", "mobile", true, {})); }), Errc::unknown_party);
  EXPECT_EQ(code_of([&] { net.deliver(msg("phone", "shop", "radio", true, {})); }), Errc::config_error);
  auto t = net.finish({});
  EXPECT_EQ(code_of([&] { knowledge_query(t, "ghost", "good"); }), Errc::unknown_party);
}

TEST_F(Net, DropHookRecordsDropAndSkipsKnowledge) {
  net.add_hook([](Message& m) { return m.kind != "secret"; });
  auto r = net.deliver(msg("phone", "shop", "mobile", false, {f("goods", Label::good, "cola")}, "secret"));
  EXPECT_FALSE(r.has_value());
  auto t = net.finish({});
  EXPECT_TRUE(t.messages().empty());
  ASSERT_EQ(t.events_of_kind("drop").size(), 1u);
  EXPECT_TRUE(knowledge_query(t, "shop", "good").empty());
  EXPECT_TRUE(t.carrier_views["mno"].empty());
}

TEST_F(Net, ModifyHookChangesWhatReceiverSees) {
  net.add_hook([](Message& m) {
    for (auto& x : m.fields)
      if (x.name == "price") x.value = "1";
    return true;
  });
  auto r = net.deliver(msg("phone", "shop", "mobile", true, {f("price", Label::price, "150")}));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->get("price"), "1");
  EXPECT_EQ(knowledge_query(net.finish({}), "shop", "price"), std::set<std::string>{"1"});
}

TEST_F(Net, MissingFieldIsMalformed) {
  auto r = net.deliver(msg("phone", "shop", "mobile", true, {}));
  EXPECT_EQ(code_of([&] { r->get("nonce"); }), Errc::malformed_message);
}

TEST_F(Net, JsonlRoundTrip) {
  net.deliver(msg("phone", "shop", "mobile", true, {f("goods", Label::good, "cola", {"shop"})}));
  net.annotate("delivery", "pos", {{"order", "order-1"}});
  net.deliver(msg("pos", "phone", "short-range", false, {f("price", Label::price, "150")}));
  auto t = net.finish({{"scenario", "unit"}});
  auto text = to_jsonl(t);
  auto back = parse_jsonl(text);
  EXPECT_EQ(to_jsonl(back), text);
  EXPECT_EQ(back.records, t.records);
  EXPECT_EQ(back.knowledge, t.knowledge);
  EXPECT_EQ(back.carrier_views, t.carrier_views);
  EXPECT_EQ(back.header["scenario"], "unit");
  EXPECT_TRUE(audit_knowledge(back).ok);
}

TEST_F(Net, JsonlRejectsGarbage) {
  EXPECT_EQ(code_of([] { parse_jsonl(""); }), Errc::malformed_message);
  EXPECT_EQ(code_of([] { parse_jsonl("not json\n"); }), Errc::malformed_message);
  auto text = to_jsonl(net.finish({}));
  EXPECT_EQ(code_of([&] { parse_jsonl(text.substr(0, text.size() / 2)); }), Errc::malformed_message);
  auto bad_label = to_jsonl([&] {
    net.deliver(msg("phone", "shop", "mobile", true, {f("goods", Label::good, "cola")}));
    return net.finish({});
  }());
  auto pos = bad_label.find("\"good\"");
  ASSERT_NE(pos, std::string::npos);
  bad_label.replace(pos, 6, "\"gold\"");
  EXPECT_EQ(code_of([&] { parse_jsonl(bad_label); }), Errc::malformed_message);
}

TEST_F(Net, AuditorCatchesInjectedKnowledge) {
  net.deliver(msg("phone", "shop", "mobile", true, {f("goods", Label::good, "cola")}));
  auto t = net.finish({});
  ASSERT_TRUE(audit_knowledge(t).ok);
  t.knowledge["mno"].insert({Label::good, "goods", "cola"});
  auto a = audit_knowledge(t);
  EXPECT_FALSE(a.ok);
  EXPECT_FALSE(a.problems.empty());
}

TEST_F(Net, AuditorCatchesMissingKnowledge) {
  net.deliver(msg("phone", "shop", "mobile", false, {f("goods", Label::good, "cola")}));
  auto t = net.finish({});
  t.knowledge["mno"].clear();
  EXPECT_FALSE(audit_knowledge(t).ok);
}

TEST_F(Net, AuditorCatchesShortRangeInCarrierView) {
  net.deliver(msg("pos", "phone", "short-range", false, {f("price", Label::price, "150")}));
  auto t = net.finish({});
  t.carrier_views["mno"].push_back({1, "short-range", "pos", "phone", {"price"}});
  EXPECT_FALSE(audit_knowledge(t).ok);
}

TEST(Labels, FixedTaxonomyRoundTrips) {
  EXPECT_EQ(std::size(kAllLabels), 7u);
  for (auto l : kAllLabels) EXPECT_EQ(label_from_string(to_string(l)), l);
  EXPECT_FALSE(label_from_string("secret").has_value());
}

// Property: for random traffic, the auditor agrees with the live tracker and
// the carrier never sees a short-range message.
TEST(NetProperty, RandomTrafficAuditsClean) {
  const std::vector<std::string> parties{"a", "b", "c", "carrier"};
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Rng rng(seed);
    Network net;
    for (const auto& p : parties) net.add_party(p, p == "carrier" ? "mno" : "device");
    net.add_channel({"mobile", ChannelKind::mobile_network, "carrier"});
    net.add_channel({"short-range", ChannelKind::short_range, ""});
    for (int i = 0; i < 40; ++i) {
      auto from = parties[rng.uniform(3)];
      auto to = parties[rng.uniform(4)];
      std::vector<Field> fields;
      for (std::uint64_t k = 0; k < rng.uniform(4); ++k) {
        std::vector<std::string> readers;
        if (rng.uniform(3) == 0) readers.push_back(parties[rng.uniform(4)]);
        fields.push_back(f("f" + std::to_string(rng.uniform(5)), kAllLabels[rng.uniform(7)],
                           std::to_string(rng.uniform(100)), readers));
      }
      net.deliver(msg(from, to, rng.uniform(2) ? "mobile" : "short-range", rng.uniform(2) == 0, fields));
    }
    auto t = net.finish({});
    EXPECT_TRUE(audit_knowledge(t).ok) << "seed " << seed;
    std::set<std::uint64_t> short_ids;
    for (const auto* m : t.messages())
      if (m->channel == "short-range") short_ids.insert(m->id);
    for (const auto& r : t.carrier_views["carrier"]) EXPECT_FALSE(short_ids.count(r.msg_id));
    EXPECT_EQ(to_jsonl(parse_jsonl(to_jsonl(t))), to_jsonl(t));
  }
}

}  // namespace
}  // namespace tcsim::sim
