#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "wlfield/cli.hpp"
#include "wlfield/common.hpp"
#include "wlfield/parallel.hpp"

namespace wlf::cli {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void write_outputs(const std::string& dir, const json& resolved, const CommandResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create {}: {}", dir, ec.message()));
  std::vector<Artifact> all = result.artifacts;
  all.push_back({"config.json", json_text(resolved)});
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  json entries = json::array();
  for (const auto& a : all) {
    const auto path = fs::path(dir) / a.name;
    std::ofstream os(path, std::ios::binary);
    if (!(os << a.content)) throw Error("cannot write " + path.string());
    entries.push_back({{"path", a.name}, {"bytes", a.content.size()}, {"sha256", sha256_hex(a.content)}});
  }
  const json manifest{{"command", resolved.at("command")}, {"artifacts", entries}};
  std::ofstream os(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!(os << json_text(manifest))) throw Error("cannot write manifest.json");
}

int run(int argc, char** argv) {
  CLI::App app{"Distributions on worldlines: one-particle maps, detector spectra and translation channels"};
  std::string command, config_path, out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool dump = false;
  app.add_option("command", command, "detector | kms | commutator | wavefront | translate | hadamard | angular")
      ->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "TOML or JSON run config");
  auto* out_opt = app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 for all cores");
  app.add_flag("--dump-config", dump, "print the resolved config and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    json cfg = config_path.empty() ? json::object() : load_config(config_path);
    if (command.empty()) {
      if (!cfg.contains("command")) throw ConfigError("no command given");
      command = cfg["command"].get<std::string>();
    }
    if (seed_opt->count()) cfg["seed"] = seed;
    if (threads_opt->count()) cfg["threads"] = threads;
    if (out_opt->count()) cfg["out"] = out;
    const json resolved = resolve_config(command, cfg);
    if (dump) {
      std::cout << json_text(resolved);
      return 0;
    }
    set_thread_count(resolved["threads"].get<unsigned>());
    const auto result = run_command(resolved);
    const auto dir = resolved["out"].get<std::string>();
    write_outputs(dir, resolved, result);
    if (result.status != 0) {
      std::cerr << "wlf " << command << ": " << result.message << "\n";
      return result.status;
    }
    std::cerr << fmt::format("wlf {}: wrote {} artifacts to {}\n", command, result.artifacts.size() + 2, dir);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace wlf::cli
