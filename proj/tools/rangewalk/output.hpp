#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "rangewalk/random.hpp"

namespace rangewalk::cli {

using Json = nlohmann::ordered_json;

// Output directory, the files written into it and the stamp carried by every record.
class RunContext {
 public:
  explicit RunContext(const Config& cfg);

  const std::filesystem::path& dir() const { return dir_; }
  const Config& config() const { return cfg_; }

  // record fields shared by every output line
  Json stamp(Json record) const;
  // temp file + rename; relative names resolve against dir()
  void write_atomic(const std::string& name, const std::string& content);
  void write_jsonl(const std::string& name, const std::vector<Json>& records);
  const std::vector<std::string>& outputs() const { return outputs_; }

  ShardExecutor executor() const;

 private:
  const Config& cfg_;
  std::filesystem::path dir_;
  std::vector<std::string> outputs_;
};

std::filesystem::path output_directory(const Config& cfg);
std::string utc_now();
std::string version_string();

// Written even when the run fails; `status` is the exit code.
void write_manifest(const Config& cfg, const std::filesystem::path& dir, const std::vector<std::string>& outputs,
                    const std::string& started, int status, const std::string& error);

}  // namespace rangewalk::cli
