// tcsim: run catalog scenarios, verify transcripts, list the catalog.
//
// Exit codes: 0 all assertions hold, 1 assertion mismatch, 2 usage or
// config error (including unparsable files).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcsim/crypto.hpp"
#include "tcsim/error.hpp"
#include "tcsim/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tcsim::Error(tcsim::Errc::config_error, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tcsim::Error(tcsim::Errc::config_error, "cannot write " + path.string());
  out << text;
}

tcsim::ScenarioScript load_script(const std::string& name_or_path) {
  if (tcsim::in_catalog(name_or_path)) return tcsim::catalog_script(name_or_path);
  if (name_or_path.size() > 5 && name_or_path.ends_with(".json") && fs::exists(name_or_path)) {
    auto doc = json::parse(read_file(name_or_path), nullptr, false);
    if (doc.is_discarded()) throw tcsim::Error(tcsim::Errc::config_error, name_or_path + " is not valid JSON");
    return tcsim::parse_script(doc);
  }
  throw tcsim::Error(tcsim::Errc::config_error, "no scenario named " + name_or_path);
}

void print_report(const tcsim::Report& r) {
  std::cout << r.scenario << " seed=" << r.seed;
  for (const auto& a : r.attacks) std::cout << " attack=" << a;
  std::cout << "\n";
  for (const auto& a : r.assertions) {
    const char* status = a.skipped() ? "skip" : a.passed() ? "ok  " : "FAIL";
    std::cout << "  " << status << " " << a.name;
    if (!a.skipped() && !*a.expected) std::cout << " (expected to fail)";
    if (!a.passed() && !a.detail.empty()) std::cout << ": " << a.detail;
    std::cout << "\n";
  }
  std::cout << (r.passed() ? "PASS" : "FAIL") << "\n";
}

int cmd_run(const std::string& name, std::uint64_t seed, std::string out_dir, const std::vector<std::string>& attacks,
            const std::vector<std::string>& variants) {
  auto script = load_script(name);
  tcsim::RunOptions opts{seed, attacks, variants};
  auto result = tcsim::run_scenario(script, opts);
  if (out_dir.empty()) {
    const char* env = std::getenv("TCSIM_OUT_DIR");
    out_dir = env && *env ? env : "tcsim-out";
  }
  std::string stem = script.name + "-" + std::to_string(seed);
  for (const auto& a : attacks) stem += "-" + a;
  auto transcript = fs::path(out_dir) / (stem + ".jsonl");
  auto report = fs::path(out_dir) / (stem + ".report.json");
  write_file(transcript, result.jsonl);
  write_file(report, result.report.to_json().dump(2) + "\n");
  print_report(result.report);
  std::cout << "transcript: " << transcript.string() << "\nreport: " << report.string() << "\n";
  return result.report.passed() ? 0 : 1;
}

int cmd_verify(const std::string& path, const std::string& expect_path) {
  std::string text = read_file(path);
  tcsim::sim::Transcript t;
  try {
    t = tcsim::sim::parse_jsonl(text);
  } catch (const tcsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  auto report = tcsim::check_transcript(t, tcsim::sha256_hex(tcsim::to_bytes(text)));
  print_report(report);
  bool ok = report.passed();
  if (!expect_path.empty()) {
    auto doc = json::parse(read_file(expect_path), nullptr, false);
    if (doc.is_discarded()) throw tcsim::Error(tcsim::Errc::config_error, expect_path + " is not valid JSON");
    auto expected = tcsim::Report::from_json(doc);
    if (expected.transcript_sha256 != report.transcript_sha256) {
      std::cout << "transcript digest differs from the expected report\n";
      ok = false;
    }
    if (expected.to_json()["assertions"] != report.to_json()["assertions"]) {
      std::cout << "assertion results differ from the expected report\n";
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

int cmd_list(bool as_json) {
  json entries = json::array();
  for (const auto& name : tcsim::catalog_names()) {
    auto s = tcsim::catalog_script(name);
    entries.push_back({{"name", s.name},
                       {"kind", s.kind},
                       {"description", s.description},
                       {"attacks", tcsim::supported_attacks(s)},
                       {"config", s.doc.value("config", json::object())}});
  }
  if (as_json) {
    json variants = json::object();
    for (const auto& [k, v] : tcsim::default_config().items()) variants[k] = v;
    std::cout << json{{"scenarios", entries}, {"variants", variants}}.dump(2) << "\n";
    return 0;
  }
  for (const auto& e : entries) {
    std::cout << e["name"].get<std::string>() << "  [" << e["kind"].get<std::string>() << "]\n    "
              << e["description"].get<std::string>() << "\n    attacks:";
    for (const auto& a : e["attacks"]) std::cout << " " << a.get<std::string>();
    std::cout << "\n";
  }
  std::cout << "variants (--variant KEY=VALUE, defaults):\n";
  for (const auto& [k, v] : tcsim::default_config().items()) {
    auto text = v.dump();
    if (text.size() > 60) text = text.substr(0, 57) + "...";
    std::cout << "  " << k << " = " << text << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trusted-computing mobile scenario simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a catalog scenario or a script file");
  std::string name;
  std::uint64_t seed = 42;
  std::string out_dir;
  std::vector<std::string> attacks, variants;
  run->add_option("scenario", name, "catalog name or path to a .json script")->required();
  run->add_option("--seed", seed, "64-bit seed")->capture_default_str();
  run->add_option("--out", out_dir, "output directory (default $TCSIM_OUT_DIR or ./tcsim-out)");
  run->add_option("--attack", attacks, "attack to inject; repeatable");
  run->add_option("--variant", variants, "config override KEY=VALUE; repeatable");

  auto* verify = app.add_subcommand("verify", "re-check a transcript file");
  std::string path, expect;
  verify->add_option("transcript", path, "transcript (.jsonl)")->required()->check(CLI::ExistingFile);
  verify->add_option("--expect", expect, "report the results must match")->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("list", "list the scenario catalog");
  bool as_json = false;
  list->add_flag("--json", as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(name, seed, out_dir, attacks, variants);
    if (*verify) return cmd_verify(path, expect);
    if (*list) return cmd_list(as_json);
  } catch (const tcsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
