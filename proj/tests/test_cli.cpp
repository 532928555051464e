#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "kerrborn/experiments.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = KERRBORN_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("kerrborn_cli_" + std::to_string(std::rand()) + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// small, fast variant of the built-in interval scenario
fs::path fast_scenario(const TempDir& t) {
    const fs::path p = t.path / "scenario.json";
    REQUIRE(run("scenario --preset 1d-gaussian --out " + p.string()) == 0);
    return p;
}

const std::string kFast = " --synthesis-resolution 65 --inversion-resolution 33 --order 2";

}  // namespace

TEST_CASE("scenario presets are written and loadable by every subcommand") {
    TempDir t;
    for (const char* preset : {"1d-gaussian", "2d-disk-weak", "2d-disk-strong", "2d-gaussian"}) {
        const fs::path p = t.path / (std::string(preset) + ".json");
        CHECK(run(std::string("scenario --preset ") + preset + " --out " + p.string()) == 0);
        CHECK(fs::exists(p));
    }
    CHECK(run("scenario --preset no-such --out " + (t.path / "x.json").string()) == 1);
}

TEST_CASE("malformed scenario: exit 1 and no partial outputs") {
    TempDir t;
    const fs::path bad = t.path / "bad.json";
    std::ofstream(bad) << "{ this is not json";
    const fs::path out = t.path / "run";
    CHECK(run("synth --scenario " + bad.string() + " --out " + out.string()) == 1);
    CHECK(!fs::exists(out / "phi.csv"));
    CHECK(!fs::exists(out / "manifest.json"));

    // structurally valid JSON with an invalid parameter must also be atomic
    const fs::path bad2 = t.path / "bad2.json";
    TempDir t2;
    const fs::path good = fast_scenario(t2);
    std::ofstream(bad2) << slurp(good);
    CHECK(run("synth --scenario " + good.string() + " --out " + out.string() +
              " --tau 2.0") == 1);
    CHECK(!fs::exists(out / "phi.csv"));
}

TEST_CASE("invert and analyze --check-data require synthesized data") {
    TempDir t;
    const fs::path sc = fast_scenario(t);
    const fs::path out = t.path / "run";
    CHECK(run("invert --scenario " + sc.string() + " --out " + out.string() + kFast) == 1);
    CHECK(run("analyze --check-data --scenario " + sc.string() + " --out " + out.string() +
              kFast) == 1);
}

TEST_CASE("full pipeline on the interval scenario") {
    TempDir t;
    const fs::path sc = fast_scenario(t);
    const fs::path out = t.path / "run";
    const std::string common = " --scenario " + sc.string() + " --out " + out.string() + kFast;

    REQUIRE(run("synth" + common) == 0);
    CHECK(fs::exists(out / "phi.csv"));
    CHECK(fs::exists(out / "synthesis_report.json"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(slurp(out / "manifest.json").find("\"config_hash\"") != std::string::npos);
    CHECK(slurp(out / "phi.csv").rfind("source,receiver,phi", 0) == 0);

    REQUIRE(run("invert" + common) == 0);
    for (const char* f : {"recon.csv", "crosssection.csv", "diagnostics.json", "report.json"})
        CHECK(fs::exists(out / f));
    CHECK(slurp(out / "report.json").find("\"l2_joint\"") != std::string::npos);

    REQUIRE(run("analyze --check-data" + common) == 0);
    const std::string rep = slurp(out / "convergence_report.json");
    for (const char* key : {"\"mu\"", "\"K\"", "\"forward_radius\"", "\"inverse_radius\"",
                            "\"data_check\""})
        CHECK(rep.find(key) != std::string::npos);

    // at full amplitude the largest sources leave the contraction regime:
    // the forward subcommand must report non-convergence via exit code 2
    CHECK(run("forward" + common) == 2);

    kerrborn::Scenario weak = kerrborn::load_scenario(sc);
    weak.medium.amplitude = 0.02;
    const fs::path weak_path = t.path / "weak.json";
    kerrborn::save_scenario(weak, weak_path);
    const std::string weak_common =
        " --scenario " + weak_path.string() + " --out " + out.string() + kFast;
    REQUIRE(run("forward" + weak_common) == 0);
    CHECK(fs::exists(out / "terms.csv"));
    CHECK(slurp(out / "forward_report.json").find("\"converged\": true") != std::string::npos);
}

TEST_CASE("noisy synthesis is reproducible for a fixed seed") {
    TempDir t;
    const fs::path sc = fast_scenario(t);
    const fs::path a = t.path / "a", b = t.path / "b", c = t.path / "c";
    const std::string common =
        " --scenario " + sc.string() + kFast + " --noise 1e-3 --seed 11 --out ";
    REQUIRE(run("synth" + common + a.string()) == 0);
    REQUIRE(run("synth" + common + b.string()) == 0);
    CHECK(slurp(a / "phi.csv") == slurp(b / "phi.csv"));
    REQUIRE(run("synth --scenario " + sc.string() + kFast + " --noise 1e-3 --seed 12 --out " +
                c.string()) == 0);
    CHECK(slurp(a / "phi.csv") != slurp(c / "phi.csv"));
}
