// End-to-end checks of the lossrisk binary.  The binary path arrives as
// argv[1] (wired up by CMake).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_binary;

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + g_binary + " " + args + " 2>&1";
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) res.out += buf;
  res.status = pclose(pipe);
  res.status = WIFEXITED(res.status) ? WEXITSTATUS(res.status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("estimate: poisson catalog values") {
  const auto res = run("estimate --model poisson --prior gamma --a 3 --b 1 --x 4");
  CHECK(res.status == 0);
  CHECK(res.out.find("gamma_hat = 3") != std::string::npos);
  CHECK(res.out.find("l_hat = 0.5") != std::string::npos);
}

TEST_CASE("estimate: multipoisson vector observation") {
  const auto res = run("estimate --model multipoisson --d 2 --a 2 --b 0 --x 1,2");
  CHECK(res.status == 0);
  CHECK(res.out.find("gamma_hat = 1;2") != std::string::npos);
  CHECK(res.out.find("l_hat = 2") != std::string::npos);
}

TEST_CASE("risk CSV: schema, reproducibility, thread independence") {
  const std::string out1 = "/tmp/lossrisk_test_risk1.csv";
  const std::string out2 = "/tmp/lossrisk_test_risk2.csv";
  const std::string args = "risk --model poisson --prior uniform --theta-grid 0.5,2 "
                           "--samples 20000 --seed 42 --out ";
  CHECK(run(args + out1, "LOSSRISK_THREADS=1 ").status == 0);
  CHECK(run(args + out2, "LOSSRISK_THREADS=2 ").status == 0);
  const std::string a = slurp(out1);
  CHECK(a == slurp(out2));  // byte identical across worker counts
  CHECK(a.rfind("theta,mean,std_error,n_samples\n", 0) == 0);

  // rows parse back per the schema
  std::stringstream ss(a);
  std::string line;
  std::getline(ss, line);
  int rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    std::stringstream fields(line);
    std::string f;
    int nfields = 0;
    while (std::getline(fields, f, ',')) {
      ++nfields;
      CHECK_NOTHROW((void)std::stod(f));
    }
    CHECK(nfields == 4);
  }
  CHECK(rows == 2);

  // same config rerun gives the identical file
  const std::string out3 = "/tmp/lossrisk_test_risk3.csv";
  CHECK(run(args + out3).status == 0);
  CHECK(a == slurp(out3));
}

TEST_CASE("minimax: gamma convergence report as JSON") {
  const std::string out = "/tmp/lossrisk_test_minimax.json";
  const auto res = run("minimax --model gamma --alpha 3 --m 1 "
                       "--n-list 1,10,100,10000,1000000 --out " + out);
  CHECK(res.status == 0);
  const std::string body = slurp(out);
  CHECK(body.find("\"sequence\":[[1,") != std::string::npos);
  CHECK(body.find("\"target\":0.394934066848") != std::string::npos);
  CHECK(body.find("\"converged\":true") != std::string::npos);
}

TEST_CASE("config file with flag overrides") {
  const std::string cfgpath = "/tmp/lossrisk_test_cfg.json";
  {
    std::ofstream cfg(cfgpath);
    cfg << R"({"model":"poisson","prior":"gamma","a":3,"b":1,"x":"4"})";
  }
  const auto base = run("estimate --config " + cfgpath);
  CHECK(base.status == 0);
  CHECK(base.out.find("l_hat = 0.5") != std::string::npos);
  // flag overrides the config's b
  const auto over = run("estimate --config " + cfgpath + " --b 3");
  CHECK(over.status == 0);
  CHECK(over.out.find("l_hat = 0.25") != std::string::npos);
}

TEST_CASE("validation errors name the offending field") {
  const auto noseed = run("risk --model poisson --prior uniform --theta-grid 1,2");
  CHECK(noseed.status != 0);
  CHECK(noseed.out.find("seed") != std::string::npos);

  const auto nogrid = run("risk --model poisson --prior uniform --seed 3");
  CHECK(nogrid.status != 0);
  CHECK(nogrid.out.find("theta_grid") != std::string::npos);

  const auto badmodel = run("estimate --model weibull --x 1");
  CHECK(badmodel.status != 0);
  CHECK(badmodel.out.find("model") != std::string::npos);
}

TEST_CASE("rukhin command emits joint-risk rows") {
  const std::string out = "/tmp/lossrisk_test_rukhin.csv";
  const auto res = run("rukhin --model normal --d 4 --theta-grid 0,1 --samples 20000 "
                       "--seed 5 --out " + out);
  CHECK(res.status == 0);
  const std::string body = slurp(out);
  CHECK(body.rfind("theta,mean,std_error,n_samples\n", 0) == 0);
  // vector theta serialized with semicolons
  CHECK(body.find("1;1;1;1,") != std::string::npos);
}

TEST_CASE("verify passes clean and fails under the corruption hook") {
  const auto clean = run("verify --seed 7");
  CHECK(clean.status == 0);
  CHECK(clean.out.find("PASS") != std::string::npos);

  const auto corrupted = run("verify --seed 7 --inject-error");
  CHECK(corrupted.status != 0);
  CHECK(corrupted.out.find("FAIL") != std::string::npos);
}

int main(int argc, char** argv) {
  if (argc > 1) g_binary = argv[1];
  doctest::Context ctx;
  ctx.applyCommandLine(1, argv);
  return ctx.run();
}
