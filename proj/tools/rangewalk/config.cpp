#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rangewalk::cli {

namespace {

using K = KeyKind;

std::vector<KeyDef> with_common(std::vector<KeyDef> keys) {
  keys.push_back({"seed", K::Integer, "1", "global seed; worker streams are derived from it"});
  keys.push_back({"out", K::Text, "", "output directory (default: $RANGEWALK_OUT or ./rangewalk-out)"});
  keys.push_back({"workers", K::Integer, "1", "worker threads; results do not depend on it"});
  return keys;
}

const std::map<std::string, std::vector<KeyDef>>& table() {
  static const std::map<std::string, std::vector<KeyDef>> t = {
      {"constants", with_common({{"d", K::Integer, "0", "dimension, 0 for every d in 1..6"}})},
      {"sample",
       with_common({{"d", K::Integer, "3", "dimension"},
                    {"n", K::Integer, "0", "scale; sets N = n^(d+2)"},
                    {"N", K::Integer, "0", "walk length (alternative to n)"},
                    {"beta", K::Real, "1", "inverse temperature in [0, 1]"},
                    {"sweeps", K::Integer, "1000", "recorded sweeps per chain"},
                    {"burn_in", K::Integer, "100", "discarded sweeps"},
                    {"thinning", K::Integer, "1", "sweeps between records"},
                    {"chains", K::Integer, "1", "independent chains"},
                    {"snapshot_every", K::Integer, "0", "write a walk snapshot every k-th record (0: none)"},
                    {"mix_single", K::Real, "0.004", "single-step proposal weight"},
                    {"mix_block", K::Real, "0.002", "block proposal weight"},
                    {"mix_pivot", K::Real, "0.004", "pivot proposal weight"},
                    {"mix_fiber", K::Real, "0.55", "fiber proposal weight"},
                    {"mix_shuffle", K::Real, "0.44", "shuffle proposal weight"}})},
      {"zn",
       with_common({{"d", K::Integer, "3", "dimension"},
                    {"N", K::Integer, "8", "walk length"},
                    {"beta", K::Real, "1", "inverse temperature"},
                    {"mode", K::Text, "exact", "exact or ais"},
                    {"replicas", K::Integer, "64", "AIS replicas"},
                    {"rungs", K::Integer, "100", "AIS rungs after beta = 0"},
                    {"first_beta", K::Real, "0.001", "first nonzero AIS rung"},
                    {"sweeps_per_rung", K::Integer, "1", "AIS sweeps per rung"}})},
      {"shape",
       with_common({{"input", K::Text, "", "JSONL sample archive written by `sample`"},
                    {"d", K::Integer, "3", "dimension"},
                    {"kappa", K::Real, "0.05", "mesoscopic exponent"},
                    {"fill_factor", K::Real, "0.8", "fill ball radius in units of rho_d n"},
                    {"fill_level", K::Real, "0.95", "fill fraction counted as filled"}})},
      {"coarse",
       with_common({{"walk", K::Text, "", "walk snapshot file"},
                    {"n", K::Integer, "0", "scale (0: infer from N = n^(d+2))"},
                    {"c", K::Real, "1", "range penalty constant of the budget"},
                    {"kappa", K::Real, "25", "energy-event constant"}})},
      {"dv-check",
       with_common({{"d", K::Integer, "3", "dimension"},
                    {"sites", K::IntList, "2,3", "segment lengths, one instance each"},
                    {"t", K::Integer, "12", "visits to the domain"},
                    {"radius", K::Real, "0.2", "l1 radius of the occupation ball"},
                    {"trials", K::Integer, "100000", "Monte Carlo walks per instance"},
                    {"margin", K::Integer, "24", "kill-box margin around the domain"}})},
      {"fk", with_common({{"voxels", K::Text, "", "voxel set: spacing, then one cell index per line"}})},
      {"ineq-check",
       with_common({{"d", K::Integer, "3", "dimension"},
                    {"n", K::Integer, "4", "box side"},
                    {"fields", K::Integer, "100", "random fields"},
                    {"density", K::Real, "0.5", "probability a box site is nonzero"}})},
  };
  return t;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_int(const std::string& s, long long& out) {
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

bool valid(const KeyDef& k, const std::string& v) {
  long long i = 0;
  double x = 0;
  switch (k.kind) {
    case K::Integer:
      return parse_int(v, i);
    case K::Real:
      return parse_real(v, x);
    case K::IntList: {
      std::stringstream ss(v);
      std::string item;
      bool any = false;
      while (std::getline(ss, item, ',')) {
        if (!parse_int(trim(item), i)) return false;
        any = true;
      }
      return any;
    }
    case K::Text:
      return v.find('\n') == std::string::npos;
  }
  return false;
}

bool known(const std::string& sub, const std::string& key) {
  for (const KeyDef& k : table().at(sub))
    if (k.name == key) return true;
  return false;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : table()) v.push_back(k);
    return v;
  }();
  return names;
}

const std::vector<KeyDef>& schema(const std::string& subcommand) {
  auto it = table().find(subcommand);
  if (it == table().end()) throw UsageError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

Config::Config(std::string subcommand) : sub_(std::move(subcommand)) {
  for (const KeyDef& k : schema(sub_))
    if (!k.fallback.empty()) values_[k.name] = k.fallback;
}

const KeyDef& Config::def(const std::string& key) const {
  for (const KeyDef& k : schema(sub_))
    if (k.name == key) return k;
  throw UsageError("unknown key '" + key + "' for " + sub_);
}

void Config::set(const std::string& key, const std::string& value) {
  const KeyDef& k = def(key);
  const std::string v = trim(value);
  if (!valid(k, v)) throw UsageError("bad value '" + v + "' for key '" + key + "'");
  values_[key] = v;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::text(const std::string& key) const {
  def(key);
  auto it = values_.find(key);
  return it == values_.end() ? std::string() : it->second;
}

long long Config::integer(const std::string& key) const {
  long long v = 0;
  parse_int(text(key), v);
  return v;
}

double Config::real(const std::string& key) const {
  double v = 0;
  parse_real(text(key), v);
  return v;
}

std::vector<long long> Config::int_list(const std::string& key) const {
  std::vector<long long> out;
  std::stringstream ss(text(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v = 0;
    parse_int(trim(item), v);
    out.push_back(v);
  }
  return out;
}

std::string Config::canonical_text() const {
  std::string s = "[" + sub_ + "]\n";
  for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
  return s;
}

std::string Config::hash() const {
  // where the output goes and how many threads make it do not change it
  std::string keyed = "[" + sub_ + "]\n";
  for (const auto& [k, v] : values_)
    if (k != "out" && k != "workers") keyed += k + " = " + v + "\n";
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : keyed) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_config_text(Config& cfg, const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line, section = "common";
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "common") schema(section);  // rejects unknown sections
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (section == cfg.subcommand() || (section == "common" && known(cfg.subcommand(), key))) {
        cfg.set(key, value);
      } else if (section == "common") {
        // shared files may carry keys for other subcommands; misspellings still fail
        bool anywhere = false;
        for (const std::string& sub : subcommands())
          if (known(sub, key)) {
            Config other(sub);
            other.set(key, value);
            anywhere = true;
            break;
          }
        if (!anywhere) throw UsageError("unknown key '" + key + "'");
      } else {
        Config other(section);
        other.set(key, value);
      }
    } catch (const UsageError& e) {
      throw UsageError(where + ": " + e.what());
    }
  }
}

void apply_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str(), path);
}

}  // namespace rangewalk::cli
