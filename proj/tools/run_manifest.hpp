#pragma once

// Per-run record of argv, resolved flags, seeds and file digests. Replaying a
// manifest re-executes the recorded argv.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace tse::cli {

using Json = nlohmann::ordered_json;

std::string sha256_file(const std::filesystem::path& path);

class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void set_flags(Json flags) { flags_ = std::move(flags); }
  void add_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
  void add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

  [[nodiscard]] Json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  Json flags_ = Json::object();
  Json seeds_ = Json::object();
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
};

Json read_manifest(const std::filesystem::path& path);

}  // namespace tse::cli
