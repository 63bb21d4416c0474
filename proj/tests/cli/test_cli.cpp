#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wlfield/cli.hpp"
#include "wlfield/common.hpp"

using namespace wlf;
using nlohmann::json;

TEST_CASE("sha256 of a known string") {
  CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("TOML and JSON configs parse to the same document") {
  const auto a = cli::parse_config_text("seed = 3\n[window]\nkind = \"gaussian\"\nsigma = 2.5\n");
  const auto b = cli::parse_config_text(R"({"seed": 3, "window": {"kind": "gaussian", "sigma": 2.5}})");
  CHECK(a == b);
  CHECK_THROWS_AS(cli::parse_config_text("seed = = 3"), ConfigError);
}

TEST_CASE("resolution fills defaults and is idempotent") {
  const json cfg{{"mass", 1.0}};
  const auto r = cli::resolve_config("hadamard", cfg);
  CHECK(r.at("command") == "hadamard");
  CHECK(r.at("order") == 8);
  CHECK(r.at("seed") == 1);
  CHECK(cli::resolve_config("hadamard", r) == r);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(cli::resolve_config("nonsense", json::object()), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config("detector", {{"omegas", json::array()}}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config("hadamard", {{"order", 40}}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config("commutator", json::object()), ConfigError);
}

TEST_CASE("outputs carry a manifest with hashes") {
  const auto r = cli::resolve_config("hadamard", {{"mass", 1.0}, {"short_distance", {{"enabled", false}}}});
  const auto res = cli::run_command(r);
  REQUIRE(res.status == 0);
  const auto dir = std::filesystem::temp_directory_path() / "wlf-cli-unit";
  std::filesystem::remove_all(dir);
  cli::write_outputs(dir.string(), r, res);
  std::ifstream is(dir / "manifest.json");
  const auto manifest = json::parse(is);
  REQUIRE(manifest.at("artifacts").size() == res.artifacts.size() + 1);
  for (const auto& e : manifest.at("artifacts")) {
    std::ifstream f(dir / e.at("path").get<std::string>(), std::ios::binary);
    const std::string content((std::istreambuf_iterator<char>(f)), {});
    CHECK(cli::sha256_hex(content) == e.at("sha256"));
    CHECK(content.size() == e.at("bytes"));
  }
  std::filesystem::remove_all(dir);
}
