#include <nacabe/scenario/runner.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

using namespace nacabe;
using namespace nacabe::scenario;

namespace {

std::string
readFile(const std::string& path)
{
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

ScenarioConfig
bundled(const std::string& name)
{
  return ScenarioConfig::fromJsonText(readFile(std::string(NACABE_SCENARIO_DIR) + "/" +
                                               name));
}

} // namespace

TEST_CASE("the bundled mhealth-kp scenario meets every expectation")
{
  ScenarioConfig config = bundled("mhealth-kp.json");
  RunReport report = runScenario(config, 42);
  INFO(report.summaryText());
  REQUIRE(report.ok);
  REQUIRE(report.consumptions.size() == 5);
  CHECK(report.consumptions[0].outcome == "SUCCESS"); // doctor, bg at work
  CHECK(report.consumptions[1].outcome == "DENIED");  // doctor, bg at home
  CHECK(report.consumptions[2].outcome == "SUCCESS"); // doctor, hr at home
  CHECK(report.consumptions[3].outcome == "SUCCESS"); // researcher, bg
  CHECK(report.consumptions[4].outcome == "DENIED");  // researcher, hr
  CHECK(report.exitCode() == 0);
  CHECK(report.dkeys.size() == 2);
  CHECK(report.cksPublished >= 3); // one per distinct tag
}

TEST_CASE("the bundled cp-flaw scenario documents the cross-attribute leak")
{
  ScenarioConfig config = bundled("cp-flaw.json");
  RunReport report = runScenario(config, 42);
  INFO(report.summaryText());
  REQUIRE(report.ok);
  REQUIRE(report.consumptions.size() == 2);
  // the confused consumer incorrectly succeeds on (bg AND home)
  CHECK(report.consumptions[0].outcome == "SUCCESS");
  // and is still denied where an attribute is genuinely missing
  CHECK(report.consumptions[1].outcome == "DENIED");
}

TEST_CASE("identical seeds give byte-identical reports")
{
  ScenarioConfig config = bundled("mhealth-kp.json");
  RunReport a = runScenario(config, 7);
  RunReport b = runScenario(config, 7);
  CHECK(a.toJsonLines() == b.toJsonLines());
  // a different seed still satisfies the expectations
  RunReport c = runScenario(config, 8);
  CHECK(c.ok);
}

TEST_CASE("expectation mismatches flip the exit code")
{
  ScenarioConfig config = bundled("cp-flaw.json");
  // invert the documented flaw: expect the leak not to happen
  config.consumptions[0].expected = "DENIED";
  RunReport report = runScenario(config, 42);
  CHECK_FALSE(report.ok);
  CHECK(report.exitCode() == 1);
  CHECK_FALSE(report.consumptions[0].ok);
}

TEST_CASE("config validation rejects inconsistent scenarios")
{
  std::string text = readFile(std::string(NACABE_SCENARIO_DIR) + "/mhealth-kp.json");

  // unparsable JSON
  CHECK_THROWS_AS(ScenarioConfig::fromJsonText("{nope"), nlohmann::json::exception);

  // unknown node in a link
  {
    auto j = nlohmann::json::parse(text);
    j["links"][0]["a"] = "ghost";
    CHECK_THROWS_AS(ScenarioConfig::fromJson(j), ConfigError);
  }
  // grant pointing at a producer
  {
    auto j = nlohmann::json::parse(text);
    j["grants"][0]["consumer"] = "alice";
    CHECK_THROWS_AS(ScenarioConfig::fromJson(j), ConfigError);
  }
  // KP production without attributes
  {
    auto j = nlohmann::json::parse(text);
    j["productions"][0].erase("attributes");
    CHECK_THROWS_AS(ScenarioConfig::fromJson(j), ConfigError);
  }
  // bad expected outcome
  {
    auto j = nlohmann::json::parse(text);
    j["consumptions"][0]["expected"] = "MAYBE";
    CHECK_THROWS_AS(ScenarioConfig::fromJson(j), ConfigError);
  }
  // duplicate node ids
  {
    auto j = nlohmann::json::parse(text);
    j["nodes"][1]["id"] = "router";
    CHECK_THROWS_AS(ScenarioConfig::fromJson(j), ConfigError);
  }
  // loss probability out of range
  {
    auto j = nlohmann::json::parse(text);
    j["links"][0]["loss"] = 1.5;
    CHECK_THROWS_AS(ScenarioConfig::fromJson(j), ConfigError);
  }
}

TEST_CASE("reports carry the scenario counters")
{
  ScenarioConfig config = bundled("mhealth-kp.json");
  RunReport report = runScenario(config, 42);
  CHECK(report.interestsForwarded > 0);
  CHECK(report.dataForwarded > 0);
  CHECK(report.virtualTimeMs > 0);
  for (const auto& d : report.dkeys) {
    CHECK(d.bytes > 0);
    CHECK(d.segments >= 1);
  }
  // JSONL shape: one line per consumption plus a summary
  std::string lines = report.toJsonLines();
  size_t lineCount = static_cast<size_t>(std::count(lines.begin(), lines.end(), '\n'));
  CHECK(lineCount == report.consumptions.size() + 1);
  size_t lastStart = lines.rfind('\n', lines.size() - 2);
  auto summary = nlohmann::json::parse(lines.substr(lastStart + 1));
  CHECK(summary.at("type") == "summary");
  CHECK(summary.at("ok") == true);
}
