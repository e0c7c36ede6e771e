#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int exit_code(const std::string& args) {
    const std::string cmd = std::string(BANKDYN_EXE) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Scratch {
    fs::path dir = fs::temp_directory_path() / "bankdyn_cli_e2e";
    Scratch() { fs::remove_all(dir); }
    ~Scratch() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("exit codes distinguish usage, input and success") {
    Scratch s;
    CHECK(exit_code("simulate --no-such-flag") == 2);
    CHECK(exit_code("phase --alpha 1:0:0.1 --out " + s.dir.string()) == 2);
    CHECK(exit_code("simulate --holdings /nonexistent.csv --banks /nonexistent.csv --out " +
                    s.dir.string()) == 3);
    CHECK(exit_code("--quiet simulate --net " + std::string(BANKDYN_DATA_DIR) + " --out " +
                    (s.dir / "ok").string()) == 0);
    for (const char* f : {"prices.csv", "equities.csv", "verdict.json", "manifest.json"}) {
        CHECK(fs::exists(s.dir / "ok" / f));
    }
}

TEST_CASE("generate reproduces the frozen seeded network") {
    Scratch s;
    REQUIRE(exit_code("--quiet --seed 7 generate --out " + s.dir.string()) == 0);
    const fs::path frozen = BANKDYN_DATA_DIR;
    CHECK(slurp(s.dir / "holdings.csv") == slurp(frozen / "holdings.csv"));
    CHECK(slurp(s.dir / "banks.csv") == slurp(frozen / "banks.csv"));
}

TEST_CASE("sweep output does not depend on the worker count") {
    Scratch s;
    const std::string common = "--quiet sweep --net " + std::string(BANKDYN_DATA_DIR);
    REQUIRE(exit_code(common + " --jobs 1 --out " + (s.dir / "a").string()) == 0);
    REQUIRE(exit_code(common + " --jobs 3 --out " + (s.dir / "b").string()) == 0);
    const auto a = slurp(s.dir / "a" / "sweep.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(s.dir / "b" / "sweep.csv"));
}

TEST_CASE("replay reproduces recorded outputs") {
    Scratch s;
    REQUIRE(exit_code("--quiet rewire --trials 3 --out " + (s.dir / "run").string()) == 0);
    CHECK(exit_code("replay " + (s.dir / "run" / "manifest.json").string() + " --out " +
                    (s.dir / "again").string()) == 0);
    CHECK(slurp(s.dir / "run" / "rewire.csv") == slurp(s.dir / "again" / "rewire.csv"));
}
