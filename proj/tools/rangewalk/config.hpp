#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rangewalk::cli {

// Bad command line or config text. Maps to exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyKind { Integer, Real, Text, IntList };

struct KeyDef {
  std::string name;
  KeyKind kind = KeyKind::Text;
  std::string fallback;  // empty text means "no value"
  std::string help;
};

// Keys a subcommand accepts. Every subcommand also takes seed, out and workers.
const std::vector<KeyDef>& schema(const std::string& subcommand);
const std::vector<std::string>& subcommands();

class Config {
 public:
  explicit Config(std::string subcommand);

  const std::string& subcommand() const { return sub_; }
  // validates the key against the schema and the value against its kind
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string text(const std::string& key) const;
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  std::vector<long long> int_list(const std::string& key) const;
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed")); }

  const std::map<std::string, std::string>& values() const { return values_; }
  // "[subcommand]" then sorted "key = value" lines; parses back to the same Config
  std::string canonical_text() const;
  // FNV-1a 64 of the canonical text minus out and workers, as 16 hex digits
  std::string hash() const;

  bool operator==(const Config& other) const { return sub_ == other.sub_ && values_ == other.values_; }

 private:
  const KeyDef& def(const std::string& key) const;

  std::string sub_;
  std::map<std::string, std::string> values_;
};

// Plain-text config: "key = value" lines, '#' comments, optional [section]
// headers. Keys before any header, or under [common], apply to every
// subcommand; keys under [<subcommand>] apply to that subcommand only. Keys in
// sections for other subcommands are still checked against their schema, so
// a misspelling is caught whichever command is run.
void apply_config_text(Config& cfg, const std::string& text, const std::string& origin);
void apply_config_file(Config& cfg, const std::string& path);

}  // namespace rangewalk::cli
