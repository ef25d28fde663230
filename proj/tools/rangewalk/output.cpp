#include "output.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#ifndef RANGEWALK_VERSION
#define RANGEWALK_VERSION "unknown"
#endif

namespace rangewalk::cli {

namespace fs = std::filesystem;

fs::path output_directory(const Config& cfg) {
  std::string dir = cfg.text("out");
  if (dir.empty()) {
    const char* env = std::getenv("RANGEWALK_OUT");
    dir = (env && *env) ? env : "rangewalk-out";
  }
  return fs::path(dir);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string version_string() { return RANGEWALK_VERSION; }

RunContext::RunContext(const Config& cfg) : cfg_(cfg), dir_(output_directory(cfg)) {
  fs::create_directories(dir_);
}

Json RunContext::stamp(Json record) const {
  record["seed"] = cfg_.seed();
  record["config_hash"] = cfg_.hash();
  return record;
}

void RunContext::write_atomic(const std::string& name, const std::string& content) {
  const fs::path target = dir_ / name;
  fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
  outputs_.push_back(name);
}

void RunContext::write_jsonl(const std::string& name, const std::vector<Json>& records) {
  std::string body;
  for (const Json& r : records) body += r.dump() + "\n";
  write_atomic(name, body);
}

ShardExecutor RunContext::executor() const {
  const long long workers = cfg_.integer("workers");
  if (workers <= 1) return run_serial;
  return [workers](std::size_t shards, const std::function<void(std::size_t)>& body) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto loop = [&] {
      for (std::size_t i = next++; i < shards && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min<std::size_t>(std::size_t(workers), shards);
    for (std::size_t k = 0; k < count; ++k) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  };
}

void write_manifest(const Config& cfg, const fs::path& dir, const std::vector<std::string>& outputs,
                    const std::string& started, int status, const std::string& error) {
  Json m;
  m["subcommand"] = cfg.subcommand();
  Json echo = Json::object();
  for (const auto& [k, v] : cfg.values()) echo[k] = v;
  m["config"] = echo;
  m["config_text"] = cfg.canonical_text();
  m["config_hash"] = cfg.hash();
  m["seed"] = cfg.seed();
  m["version"] = version_string();
  m["started"] = started;
  m["finished"] = utc_now();
  m["outputs"] = outputs;
  m["status"] = status;
  if (!error.empty()) m["error"] = error;
  fs::create_directories(dir);
  const fs::path target = dir / (cfg.subcommand() + ".manifest.json");
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << m.dump(2) << "\n";
  }
  fs::rename(tmp, target);
}

}  // namespace rangewalk::cli
