#include <nacabe/nacabe.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

int
runCommand(const std::string& configPath, uint64_t seed, const std::string& reportPath)
{
  std::ifstream in(configPath);
  if (!in) {
    std::cerr << "cannot open config file: " << configPath << "\n";
    return 2;
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  nacabe::scenario::ScenarioConfig config;
  try {
    config = nacabe::scenario::ScenarioConfig::fromJsonText(text);
  }
  catch (const nacabe::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  nacabe::scenario::RunReport report;
  try {
    report = nacabe::scenario::runScenario(config, seed);
  }
  catch (const nacabe::scenario::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  std::cout << report.summaryText();
  if (!reportPath.empty()) {
    std::ofstream out(reportPath, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "cannot write report file: " << reportPath << "\n";
      return 2;
    }
    out << report.toJsonLines();
  }
  if (!report.ok) {
    for (const auto& c : report.consumptions) {
      if (!c.ok)
        std::cerr << "expectation mismatch: " << c.consumer << " <- " << c.name
                  << " expected " << c.expected << ", got " << c.outcome << "\n";
    }
  }
  return report.exitCode();
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"NAC-ABE scenario runner and benchmarks"};
  app.require_subcommand(1);

  // run <config.json> [--seed N] [--report out.jsonl]
  auto* run = app.add_subcommand("run", "execute a scenario config");
  std::string configPath;
  uint64_t runSeed = 42;
  std::string reportPath;
  run->add_option("config", configPath, "scenario config (JSON)")->required();
  run->add_option("--seed", runSeed, "RNG seed (default 42)");
  run->add_option("--report", reportPath, "write a JSON-lines report here");

  auto* bench = app.add_subcommand("bench", "benchmark harnesses");
  bench->require_subcommand(1);

  // bench keysize --abe {kp,cp} --max-comparisons 5
  auto* keysize = bench->add_subcommand("keysize", "key size vs comparison count");
  std::string abeFlag = "kp";
  int maxComparisons = 5;
  uint64_t keysizeSeed = 42;
  keysize->add_option("--abe", abeFlag, "abe mode: kp or cp")
    ->check(CLI::IsMember({"kp", "cp", "KP", "CP"}));
  keysize->add_option("--max-comparisons", maxComparisons, "largest policy size")
    ->check(CLI::Range(1, 64));
  keysize->add_option("--seed", keysizeSeed, "RNG seed");

  // bench ckcache --items N --max-items K --max-age MS
  auto* ckcache = bench->add_subcommand("ckcache", "CK mints under a cache policy");
  uint64_t items = 1000;
  uint64_t maxItems = 100;
  int64_t maxAgeMs = 3'600'000;
  uint64_t tags = 1;
  int64_t intervalMs = 10;
  uint64_t ckcacheSeed = 42;
  ckcache->add_option("--items", items, "number of productions")->required();
  ckcache->add_option("--max-items", maxItems, "items per CK (0 = unlimited)");
  ckcache->add_option("--max-age", maxAgeMs, "CK lifetime in ms (0 = unlimited)");
  ckcache->add_option("--tags", tags, "number of distinct tags to alternate");
  ckcache->add_option("--interval-ms", intervalMs, "virtual ms between productions");
  ckcache->add_option("--seed", ckcacheSeed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return runCommand(configPath, runSeed, reportPath);
    if (keysize->parsed()) {
      auto type = nacabe::abe::abeTypeFromToken(abeFlag);
      auto result = nacabe::scenario::benchKeySize(*type, maxComparisons, keysizeSeed);
      std::cout << result.tableText();
      return 0;
    }
    if (ckcache->parsed()) {
      auto result = nacabe::scenario::benchCkCache(items, maxItems, maxAgeMs, tags,
                                                   intervalMs, ckcacheSeed);
      std::cout << result.tableText();
      return 0;
    }
  }
  catch (const nacabe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
