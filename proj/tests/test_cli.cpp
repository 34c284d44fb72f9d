#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + SELMERLAB_CLI_PATH + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json run_json(const std::string& args, const std::string& env = "") {
  const Run r = run(args + " --format json", env);
  REQUIRE(r.code == 0);
  return json::parse(r.out);
}

}  // namespace

TEST_CASE("selmer on the worked example") {
  const json j = run_json("selmer --curve -1505,-712,2216 --d 1 --track 13:39,1:3");
  CHECK(j["summary"]["dim"]["value"] == 5);
  CHECK(j["summary"]["count_formula"]["value"] == 32);
  CHECK(j["summary"]["oracles_agree"] == true);
  CHECK(j["summary"]["contains"]["(13,39)"] == true);
  CHECK(j["summary"]["contains"]["(1,3)"] == true);
  CHECK(j["meta"]["version"] == SELMERLAB_VERSION);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("selmer --curve 1,1,2").code == 2);
  CHECK(run("selmer").code == 2);
  CHECK(run("selmer --curve 0,2,7 --d 4").code == 2);
  CHECK(run("randmat n=1 s=3").code == 2);
  CHECK(run("randmat --gamma n=1 s=4 p=2 N=10").code == 2);
  CHECK(run("pell").code == 2);
  CHECK(run("nonsense").code == 2);
  CHECK(run("dist --format xml --beta 2").code == 2);
}

TEST_CASE("budget overrun exits with 4") {
  CHECK(run("selmer --curve 0,2,7 --oracle direct --extra 3,11,13,17,19,23,29,31,37,41,43").code == 4);
}

TEST_CASE("randmat gamma example") {
  const json j = run_json("randmat --gamma n=1 s=3 p=2 N=100000 --seed 7");
  CHECK(j["summary"]["exact"]["value"] == "4/7");
  CHECK(j["summary"]["within_3_sigma"] == true);
  CHECK(j["summary"]["estimate"]["kind"] == "empirical");
  CHECK(j["meta"]["seed"] == 7);
}

TEST_CASE("dist beta example") {
  const json j = run_json("dist --beta 4");
  CHECK(j["summary"]["beta"]["value"] == "29/1024");
  CHECK(j["summary"]["beta_closed_form_agrees"] == true);
}

TEST_CASE("pell census and single d") {
  const json j = run_json("pell --census 20000");
  CHECK(j["summary"]["implications_hold"] == true);
  CHECK(j["columns"] == json::array({"d", "dim", "soluble"}));
  const json k = run_json("pell --d 34");
  CHECK(k["summary"]["soluble"]["value"] == false);
  CHECK(k["summary"]["selmer_elements"] == json::array({1, 2, 17, 34}));
}

TEST_CASE("isotropy and lattice commands") {
  const json j = run_json("isotropy --dim 2");
  CHECK(j["summary"]["max_isotropic_formula"]["value"] == "6");
  CHECK(j["summary"]["max_isotropic_brute_force"]["value"] == 6);
  CHECK(j["summary"]["unlinked_are_cosets"] == true);
  const json m = run_json("isotropy --main-term --curve 0,2,7 --literal");
  CHECK(m["summary"]["lhs"]["value"] == "2");
  CHECK(m["summary"]["rhs"]["value"] == "2");
  const json l = run_json("lattice --n1 2 --n2 1 --n3 2 --trials 10");
  CHECK(l["summary"]["all_recovered"] == true);
  CHECK(l["summary"]["expected_norm_index"]["value"] == 4);
}

TEST_CASE("condition-check reports the gamma condition") {
  CHECK(run_json("condition-check --curve 0,2,7")["summary"]["condition_gamma"] == true);
  CHECK(run_json("condition-check --curve -1,0,1 --L 2")["summary"]["condition_gamma"] == false);
}

TEST_CASE("identical invocations give identical bytes") {
  for (const std::string args : {"randmat --hist n=0 s=9 p=2 N=20000", "census --curve 0,2,7 --X 20000", "pell --census 30000",
                                 "randmat --lines s=5 p=2 U=3 N=20000"}) {
    const Run a = run(args), b = run(args), c = run(args + " --workers 3");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
  }
}

TEST_CASE("environment overrides and output file") {
  const json j = run_json("randmat --gamma n=2 s=5 p=3 N=5000", "SELMERLAB_SEED=99");
  CHECK(j["meta"]["seed"] == 99);
  const json k = run_json("randmat --gamma n=2 s=5 p=3 N=5000 --seed 5", "SELMERLAB_SEED=99");
  CHECK(k["meta"]["seed"] == 5);
  const std::string path = "cli_out_test.tsv";
  const Run r = run("dist --beta 3 --out " + path);
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == run("dist --beta 3").out);
  std::remove(path.c_str());
}

TEST_CASE("census resume covers the same rows") {
  const Run full = run("census --curve 0,2,7 --X 20000 --format json");
  const Run tail = run("census --curve 0,2,7 --X 20000 --from 10000 --format json");
  const json a = json::parse(full.out), b = json::parse(tail.out);
  json expect = json::array();
  for (const json& row : a["rows"])
    if (std::llabs(row[0].get<long long>()) >= 10000) expect.push_back(row);
  CHECK(b["rows"] == expect);
}
