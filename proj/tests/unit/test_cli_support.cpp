#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cli_support.hpp"

using namespace bankdyn::cli;

TEST_CASE("ranges are inclusive and snapped to decimals") {
    CHECK(parse_range("0.1:0.3:0.1") == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(parse_range("1:2:0.5") == std::vector<double>{1.0, 1.5, 2.0});
    CHECK(parse_range("1:2.2:0.5") == std::vector<double>{1.0, 1.5, 2.0});
    CHECK(parse_range("0.1:3:0.1").size() == 30);
    CHECK(parse_range("0.1:3:0.1").back() == 3.0);
    CHECK(parse_range("2:2:1") == std::vector<double>{2.0});
    CHECK(parse_range("0.5") == std::vector<double>{0.5});
    CHECK(parse_range("-0.5, 0.5,1") == std::vector<double>{-0.5, 0.5, 1.0});
}

TEST_CASE("malformed ranges are usage errors") {
    CHECK_THROWS_AS(parse_range("1:2"), UsageError);
    CHECK_THROWS_AS(parse_range("1:2:0"), UsageError);
    CHECK_THROWS_AS(parse_range("2:1:0.5"), UsageError);
    CHECK_THROWS_AS(parse_range("a:b:c"), UsageError);
    CHECK_THROWS_AS(parse_range(""), UsageError);
    CHECK_THROWS_AS(parse_range("1,,2"), UsageError);
    CHECK_THROWS_AS(parse_range("0:1:1e-9"), UsageError);
}

TEST_CASE("file digests use SHA-256") {
    const auto path = std::filesystem::temp_directory_path() / "bankdyn_sha_test.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "abc";
    }
    CHECK(sha256_file(path) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    std::filesystem::remove(path);
    CHECK_THROWS(sha256_file(path));
}
