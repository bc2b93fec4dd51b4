#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "peaklab/cli.hpp"

using namespace peaklab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run call(std::vector<std::string> args) {
  args.insert(args.begin(), "peaklab");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "peaklab_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("unknown subcommand prints usage and exits 2") {
  const Run r = call({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.find("usage") != std::string::npos);
  CHECK(call({}).code == 2);
}

TEST_CASE("lambda1d writes a negative value and its ladder") {
  const fs::path prefix = scratch("l1");
  const Run r = call({"lambda1d", "--q", "1.5", "--d", "2", "--j", "1", "--tol", "1e-4", "--out", prefix.string()});
  CHECK(r.code == 0);
  const json j = read_json(prefix.string() + ".json");
  CHECK(j.at("report") == "lambda1d");
  CHECK(j.at("payload").at("value").get<double>() < 0.0);
  CHECK(j.at("payload").at("ladder").size() >= 2);
  CHECK(j.at("metadata").contains("timestamp"));
  const std::string csv = read_text(prefix.string() + ".csv");
  CHECK(csv.rfind("a,N,lambda\n", 0) == 0);
}

TEST_CASE("fit on the synthetic fixture") {
  const fs::path cfg = scratch("fit_config.json"), prefix = scratch("fit");
  std::ofstream(cfg) << R"({"alphas": [1, 2, 4, 8, 16], "lambdas": [-3, -48, -768, -12288, -196608], "q": 1.5})";
  const Run r = call({"fit", "--config", cfg.string(), "--out", prefix.string()});
  CHECK(r.code == 0);
  const json p = read_json(prefix.string() + ".json").at("payload");
  CHECK(p.at("slope").get<double>() == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(p.at("coefficient").get<double>() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("invalid configs produce an error JSON") {
  const fs::path cfg = scratch("bad.json");
  std::ofstream(cfg) << R"({"alphas": [2, 4], "bogus": 1})";
  Run r = call({"sweep", "--config", cfg.string()});
  CHECK(r.code == 1);
  const json e = json::parse(r.err);
  CHECK(e.at("subcommand") == "sweep");
  CHECK(e.at("error").get<std::string>().find("bogus") != std::string::npos);

  std::ofstream(cfg) << "{not json";
  r = call({"window", "--config", cfg.string()});
  CHECK(r.code == 1);
  CHECK(json::parse(r.err).contains("error"));

  r = call({"sweep", "--config", scratch("missing.json").string()});
  CHECK(r.code == 1);
  r = call({"lambda1d", "--q", "abc"});
  CHECK(r.code == 1);
  r = call({"lambda1d", "--q", "2.5"});
  CHECK(r.code == 1);
}

TEST_CASE("payloads are reproducible") {
  const fs::path a = scratch("pb_a"), b = scratch("pb_b");
  CHECK(call({"pullback", "--d", "3", "--trials", "4", "--seed", "17", "--out", a.string()}).code == 0);
  CHECK(call({"pullback", "--d", "3", "--trials", "4", "--seed", "17", "--out", b.string()}).code == 0);
  CHECK(read_json(a.string() + ".json").at("payload").dump() == read_json(b.string() + ".json").at("payload").dump());
  CHECK(read_text(a.string() + ".csv") == read_text(b.string() + ".csv"));

  const fs::path cfg = scratch("sweep.json"), s1 = scratch("sw_a"), s2 = scratch("sw_b");
  std::ofstream(cfg) << R"({"alphas": [2, 4], "ns": 100, "check_smin": false})";
  CHECK(call({"sweep", "--config", cfg.string(), "--out", s1.string()}).code == 0);
  CHECK(call({"sweep", "--config", cfg.string(), "--threads", "2", "--out", s2.string()}).code == 0);
  CHECK(read_json(s1.string() + ".json").at("payload").dump() == read_json(s2.string() + ".json").at("payload").dump());
}

TEST_CASE("other subcommands run") {
  CHECK(call({"xsection", "--alpha", "2", "--k", "3"}).code == 0);
  const fs::path m = scratch("mesh");
  CHECK(call({"mesh", "--ns", "8", "--nt", "2", "--out", m.string()}).code == 0);
  CHECK(fs::exists(m.string() + ".mesh"));
  CHECK(read_text(m.string() + ".mesh").rfind("vertices 27 triangles 32", 0) == 0);
  const fs::path w = scratch("win.json");
  std::ofstream(w) << R"({"eps": [0.2, 0.1]})";
  CHECK(call({"window", "--config", w.string()}).code == 0);
  const Run c = call({"compare"});
  CHECK(c.code == 0);
  CHECK(c.out.find("least negative: yes") != std::string::npos);
  const Run rp = call({"reproduce", "--only", "1", "2"});
  CHECK(rp.code == 0);
  CHECK(rp.out.find("PASS  1") != std::string::npos);
  CHECK(call({"sweep", "--help"}).code == 0);
}
