#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qstab/cli/commands.hpp"

using namespace qstab;
using namespace qstab::cli;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "qstab_cli_tests" / name;
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

RunConfig config_from(const std::string& text, const std::string& out) {
  RunConfig c = parse_config_text(text);
  c.output.dir = out;
  return c;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kSmallVerify = R"({
  "domain": {"kind": "interval", "resolution": [63]},
  "problem": {"p": [1.5, 3], "side": "both"},
  "sweep": {"samples": 3, "seed": 42, "inequality_samples": 2}
})";

}  // namespace

TEST_CASE("config defaults and canonical form") {
  const RunConfig c = parse_config_text("{}");
  CHECK(c.domain.kind == DomainKind::interval);
  CHECK(c.domain.resolution == std::vector<int>{255});
  CHECK(c.problem.p == std::vector<double>{2.0});
  CHECK(c.sweep.seed == 1);
  CHECK(c.decay.truncation_radius == 40.0);
  const RunConfig again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(config_hash(again) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  RunConfig other = c;
  other.sweep.seed = 2;
  CHECK(config_hash(other) != config_hash(c));
  other = c;
  other.output.dir = "elsewhere";
  CHECK(config_hash(other) == config_hash(c));

  const RunConfig box = parse_config_text(R"({"domain": {"kind": "box2d", "resolution": 15}})");
  CHECK(box.domain.resolution == std::vector<int>{15, 15});
  CHECK(box.domain.extents == std::vector<double>{1.0, 1.0});
  CHECK(to_json(RunConfig{}) == to_json(c));
  const RunConfig rad = parse_config_text(R"({"domain": {"kind": "radial3d"}})");
  CHECK(rad.domain.truncation_radius == 20.0);
}

TEST_CASE("config errors name the offending path") {
  CHECK(config_error(R"({"problem": {"p": [2, 0.5]}})").find("/problem/p/1") != std::string::npos);
  CHECK(config_error(R"({"problem": {"sid": "max"}})").find("/problem/sid: unknown key") != std::string::npos);
  CHECK(config_error(R"({"problem": {"side": "up"}})").find("/problem/side") != std::string::npos);
  CHECK(config_error(R"({"decay": {"alpha": 2.5}})").find("/decay/alpha") != std::string::npos);
  CHECK(config_error(R"({"domain": {"kind": "box2d", "extents": [1]}})").find("/domain/extents") != std::string::npos);
  CHECK(config_error(R"({"domain": {"kind": "radial3d"}, "problem": {"source": {"preset": "sine"}}})")
            .find("sine") != std::string::npos);
  CHECK(config_error(R"({"sweep": {"samples": -1}})").find("/sweep/samples") != std::string::npos);
  CHECK(config_error("{\n  \"domain\": {\n    \"kind\": }\n}").find("line 3") != std::string::npos);
}

TEST_CASE("energy command") {
  const std::string out = scratch("energy");
  const auto r = cmd_energy(config_from(R"({"domain": {"resolution": [4095]}})", out));
  CHECK(r.exit_code == kSuccess);
  const auto j = read_json(out + "/energy.json");
  CHECK(std::abs(j["energy"].get<double>() + 1.0 / 24.0) <= 1e-5);
  CHECK(fs::exists(out + "/state.csv"));

  const std::string out0 = scratch("energy0");
  const auto zero = cmd_energy(config_from(R"({"problem": {"source": {"value": 0}}})", out0));
  CHECK(zero.exit_code == kSuccess);
  CHECK(read_json(out0 + "/energy.json")["energy"].get<double>() == 0.0);

  const std::string bad = scratch("energy_bad");
  const auto nc = cmd_energy(config_from(R"({"problem": {"potential": -20}})", bad));
  CHECK(nc.exit_code == kConfigError);
  CHECK(nc.error.find("coercive") != std::string::npos);
  CHECK(read_json(bad + "/energy.json").contains("error"));
}

TEST_CASE("optimize command") {
  const std::string out = scratch("optimize");
  const auto r = cmd_optimize(config_from(R"({"problem": {"p": [2, 3], "side": "both"}})", out));
  REQUIRE(r.exit_code == kSuccess);
  const auto j = read_json(out + "/optimize.json");
  CHECK(std::abs(j["max"][0]["V0_norm"].get<double>() - 1.0) <= 1e-6);
  CHECK(j["min"][1]["beta"].get<double>() == 12.0);
  const std::string table = slurp(out + "/optimize.csv");
  CHECK(table.rfind("side,p,norm,energy,consistency,c1,c2,c3,c4,c5,c6,c7,c8,c9,beta,", 0) == 0);
  std::stringstream ss(table);
  std::string line;
  bool found = false;
  while (std::getline(ss, line)) {
    if (line.rfind("min,3,", 0) != 0) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    CHECK(f.at(14) == "12");
    found = true;
  }
  CHECK(found);
  CHECK(fs::exists(out + "/optimize_max_p2.csv"));
  CHECK(fs::exists(out + "/optimize_min_p3.csv"));

  const auto zero = cmd_optimize(config_from(R"({"problem": {"source": {"value": 0}}})", scratch("optimize0")));
  CHECK(zero.exit_code == kConfigError);
  CHECK(zero.error.find("degenerate") != std::string::npos);
}

TEST_CASE("verify command: passes, round-trips, reruns identically") {
  const std::string a = scratch("verify_a");
  const auto r = cmd_verify(config_from(kSmallVerify, a));
  CHECK(r.exit_code == kSuccess);
  // 2 p values x 3 samples x (2 max rows + 1 min row), then 3 q values x 2
  // samples for Holder (2 rows each), Clarkson and Strauss.
  CHECK(r.rows.size() == 18 + 12 + 6 + 6);
  for (const auto& row : r.rows) CHECK(row.passed);
  const auto back = read_report_csv(a + "/verify.csv");
  REQUIRE(back.size() == r.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == static_cast<int>(i));
    CHECK(to_csv_line(back[i]) == to_csv_line(r.rows[i]));
    CHECK(back[i].margin == r.rows[i].margin);
  }
  CHECK(slurp(a + "/verify.csv").rfind(std::string(kVerifyHeader) + "\n", 0) == 0);
  const auto side = read_json(a + "/verify.json");
  CHECK(side["all_passed"].get<bool>());
  CHECK(side["config_hash"].get<std::string>() == config_hash(parse_config_text(kSmallVerify)));

  const std::string b = scratch("verify_b");
  RunConfig threaded = config_from(kSmallVerify, b);
  threaded.threads = 3;
  CHECK(cmd_verify(threaded).exit_code == kSuccess);
  CHECK(slurp(a + "/verify.csv") == slurp(b + "/verify.csv"));
  CHECK(slurp(a + "/verify.json") == slurp(b + "/verify.json"));

  RunConfig reseeded = config_from(kSmallVerify, scratch("verify_c"));
  reseeded.sweep.seed = 43;
  CHECK(cmd_verify(reseeded).exit_code == kSuccess);
  CHECK(slurp(a + "/verify.csv") != slurp(reseeded.output.dir + "/verify.csv"));
}

TEST_CASE("verify with zero samples writes an empty report") {
  const std::string out = scratch("verify_empty");
  const auto r = cmd_verify(config_from(R"({"sweep": {"samples": 0}})", out));
  CHECK(r.exit_code == kSuccess);
  CHECK(r.rows.empty());
  CHECK(r.warnings.size() == 1);
  CHECK(slurp(out + "/verify.csv") == std::string(kVerifyHeader) + "\n");
}

TEST_CASE("decay command") {
  const std::string out = scratch("decay");
  const auto r = cmd_decay(config_from(R"({})", out));
  CHECK(r.exit_code == kSuccess);
  const auto j = read_json(out + "/decay.json");
  CHECK(std::abs(j["fit"]["slope"].get<double>() + 6.0) <= 0.6);
  CHECK(j["bootstrap"]["steps_verified"].get<int>() >= 3);
  CHECK(j["manufactured"]["passed"].get<bool>() == true);
  CHECK(fs::exists(out + "/decay_loglog.csv"));
  CHECK(slurp(out + "/decay.csv").rfind("case,q,alpha,lo,hi,slope,", 0) == 0);
}

TEST_CASE("command line front end") {
  std::ostringstream out, err;
  const char* help[] = {"qstab", "--help"};
  CHECK(run_cli(2, help, out, err) == kSuccess);
  CHECK(out.str().find("verify") != std::string::npos);

  const char* unknown[] = {"qstab", "frobnicate"};
  CHECK(run_cli(2, unknown, out, err) == kConfigError);

  const std::string cfg = scratch("cli_cfg") + ".json";
  fs::create_directories(fs::path(cfg).parent_path());
  {
    std::ofstream f(cfg);
    f << R"({"decay": {"alpha": 2.0}})";
  }
  const char* bad[] = {"qstab", "decay", "--config", cfg.c_str()};
  std::ostringstream e2;
  CHECK(run_cli(4, bad, out, e2) == kConfigError);
  CHECK(e2.str().find("/decay/alpha") != std::string::npos);

  {
    std::ofstream f(cfg);
    f << R"({"sweep": {"samples": 1, "inequalities": false}, "domain": {"resolution": [31]}})";
  }
  const std::string dir = scratch("cli_verify");
  const char* ok[] = {"qstab", "verify", "--config", cfg.c_str(), "--out", dir.c_str(), "--seed", "7", "--threads", "2"};
  std::ostringstream o3;
  CHECK(run_cli(10, ok, o3, err) == kSuccess);
  CHECK(o3.str().find("3/3 rows passed") != std::string::npos);
  CHECK(read_json(dir + "/verify.json")["seed"].get<std::uint64_t>() == 7);
}
