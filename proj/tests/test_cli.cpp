#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "cortexk/io.hpp"

using namespace cortexk;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("cortexk_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const fs::path log = work_dir() / "last_run.log";
  const std::string cmd =
      std::string("\"") + CORTEXK_BIN + "\" " + args + " > " + log.string() +
      " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(log);
  r.output.assign(std::istreambuf_iterator<char>(is), {});
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is), {});
}

// a kernel-column run small enough to finish in milliseconds
const std::string kTiny =
    "kernel --set x_half=0.2 --set x_step=0.1 --set y_half=0.2 "
    "--set y_step=0.1 --set theta_half=0.3 --set theta_step=0.3";

}  // namespace

TEST_CASE("the cli requires a subcommand and offers help") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("no-such-command").code == 2);
  const RunResult help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.output.find("kernel") != std::string::npos);
  CHECK(help.output.find("propagate") != std::string::npos);
}

TEST_CASE("a tiny kernel run writes outputs plus a checkable manifest") {
  const fs::path out = work_dir() / "tiny";
  const RunResult r = run_cli(kTiny + " --out " + out.string());
  CHECK(r.code == 0);
  for (const char* name : {"kernel.kgrid", "kernel_xy.pgm", "kernel_slice.pgm",
                           "field.pgm", "run_config.txt", "manifest.txt"})
    CHECK(fs::exists(out / name));

  // the kgrid really is the advertised grid
  const KGrid kg = read_kgrid(out / "kernel.kgrid");
  CHECK(kg.grid.dim() == 3);
  CHECK(kg.grid.axis(0).count == 5);
  CHECK(kg.grid.axis(2).count == 3);
  CHECK(kg.values.abs().maxCoeff() > 0.0);

  // every manifest hash matches the file it names
  const std::string manifest = slurp(out / "manifest.txt");
  CHECK(manifest.find("[config]") == 0);
  const size_t sect = manifest.find("[outputs]\n");
  REQUIRE(sect != std::string::npos);
  std::stringstream rows(manifest.substr(sect + 10));
  std::string line;
  int checked = 0;
  while (std::getline(rows, line)) {
    const size_t sp = line.find(' ');
    REQUIRE(sp != std::string::npos);
    const std::string name = line.substr(0, sp);
    const std::string hex = line.substr(sp + std::string(" fnv1a64=").size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(file_hash(out / name)));
    CHECK(hex == buf);
    ++checked;
  }
  CHECK(checked == 5);  // all outputs except the manifest itself
}

TEST_CASE("config files, dedicated flags and --set layer in order") {
  const fs::path cfg = work_dir() / "layer.cfg";
  std::ofstream(cfg) << "lambda = 2\nsigma = 0.7\n";
  const fs::path out = work_dir() / "layered";
  const RunResult r = run_cli(kTiny + " --config " + cfg.string() +
                              " --lambda 3 --out " + out.string());
  CHECK(r.code == 0);
  const std::string resolved = slurp(out / "run_config.txt");
  CHECK(resolved.find("lambda = 3\n") != std::string::npos);  // flag wins
  CHECK(resolved.find("sigma = 0.7\n") != std::string::npos);  // file kept
  // the run location is not part of the resolved configuration
  CHECK(resolved.find("out") == std::string::npos);
  CHECK(resolved.find("threads") == std::string::npos);
}

TEST_CASE("bad invocations exit with the documented codes") {
  CHECK(run_cli(kTiny + " --set nonsense=1 --out " +
                (work_dir() / "e1").string())
            .code == 2);  // unknown config key
  CHECK(run_cli(kTiny + " --set malformed --out " +
                (work_dir() / "e2").string())
            .code == 2);  // --set without '='
  CHECK(run_cli("kernel --preset fig-diffK --out " +
                (work_dir() / "e3").string())
            .code == 2);  // preset bound to another command
  CHECK(run_cli("kernel --config /no/such/file.cfg --out " +
                (work_dir() / "e4").string())
            .code == 4);  // unreadable config file
  const RunResult r = run_cli(kTiny + " --set lambda=zero --out " +
                              (work_dir() / "e5").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("lambda") != std::string::npos);
  CHECK(run_cli("kernel --set x0=0.05 --set x_half=0.2 --set x_step=0.1"
                " --set y_half=0.2 --set y_step=0.1 --set theta_half=0.3"
                " --set theta_step=0.3 --out " +
                (work_dir() / "e6").string())
            .code == 2);  // seed point off the grid
}

TEST_CASE("identical invocations produce identical bytes") {
  const fs::path out1 = work_dir() / "det1";
  const fs::path out2 = work_dir() / "det2";
  REQUIRE(run_cli(kTiny + " --out " + out1.string()).code == 0);
  REQUIRE(run_cli(kTiny + " --out " + out2.string()).code == 0);
  for (const char* name : {"kernel.kgrid", "kernel_xy.pgm", "kernel_slice.pgm",
                           "field.pgm", "run_config.txt", "manifest.txt"})
    CHECK(slurp(out1 / name) == slurp(out2 / name));
}
