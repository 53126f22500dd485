#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qpc::cli {

namespace {

std::string describe(const std::string& key, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "config";
  if (line > 0) os << " line " << line;
  if (!key.empty()) os << " (" << key << ")";
  os << ": " << what;
  return os.str();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  std::size_t line;
};

double as_double(const std::string& key, const Entry& e) {
  double v = 0.0;
  const char* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key, e.line, "expected a number, got '" + e.value + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(key, e.line, "value must be finite");
  return v;
}

std::size_t as_count(const std::string& key, const Entry& e) {
  std::size_t v = 0;
  const char* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key, e.line, "expected a non-negative integer, got '" + e.value + "'");
  }
  return v;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "omega",  "epsilon", "d1",       "d2",    "sigma11_0", "re_sigma12_0", "im_sigma12_0",
      "t_max",  "n_out",   "n_max_override", "tail_eps", "dt_lo", "dt_hi", "error_mode"};
  return keys;
}

}  // namespace

ConfigError::ConfigError(const std::string& key, std::size_t line, const std::string& what)
    : std::runtime_error(describe(key, line, what)), key_(key), line_(line) {}

SimConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("", line_no, "expected 'key: value', got '" + std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, colon)));
    const std::string value(trim(line.substr(colon + 1)));
    if (!known_keys().contains(key)) throw ConfigError(key, line_no, "unknown key");
    if (value.empty()) throw ConfigError(key, line_no, "missing value");
    if (const auto it = entries.find(key); it != entries.end()) {
      throw ConfigError(key, line_no,
                        "duplicate key (first set on line " + std::to_string(it->second.line) + ")");
    }
    entries.emplace(key, Entry{value, line_no});
  }

  for (const char* key : {"omega", "d1", "d2", "t_max"}) {
    if (!entries.contains(key)) throw ConfigError(key, 0, std::string("missing required key ") + key);
  }

  SimConfig c;
  auto number = [&](const char* key, double& field) {
    if (const auto it = entries.find(key); it != entries.end()) field = as_double(key, it->second);
  };
  number("omega", c.omega);
  number("epsilon", c.epsilon);
  number("d1", c.d1);
  number("d2", c.d2);
  number("sigma11_0", c.sigma11_0);
  number("re_sigma12_0", c.re_sigma12_0);
  number("im_sigma12_0", c.im_sigma12_0);
  number("t_max", c.t_max);
  number("tail_eps", c.tail_eps);
  number("dt_lo", c.dt_lo);
  number("dt_hi", c.dt_hi);
  if (const auto it = entries.find("n_out"); it != entries.end()) c.n_out = as_count("n_out", it->second);
  if (const auto it = entries.find("n_max_override"); it != entries.end()) {
    c.n_max_override = as_count("n_max_override", it->second);
  }
  if (const auto it = entries.find("error_mode"); it != entries.end()) {
    if (it->second.value == "asymptotic") {
      c.error_mode = ShotNoiseModel::asymptotic;
    } else if (it->second.value == "exact") {
      c.error_mode = ShotNoiseModel::exact;
    } else {
      throw ConfigError("error_mode", it->second.line, "expected 'asymptotic' or 'exact'");
    }
  }

  auto line_of = [&](const char* key) {
    const auto it = entries.find(key);
    return it == entries.end() ? std::size_t{0} : it->second.line;
  };
  try {
    (void)c.params();
  } catch (const std::invalid_argument& e) {
    const char* key = c.d2 > c.d1 ? "d2" : "omega";
    throw ConfigError(key, line_of(key), std::string("invariant violation: ") + e.what());
  }
  try {
    (void)QubitState::make(c.sigma11_0, {c.re_sigma12_0, c.im_sigma12_0});
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sigma11_0", line_of("sigma11_0"), std::string("invariant violation: ") + e.what());
  }
  if (!(c.t_max > 0.0)) throw ConfigError("t_max", line_of("t_max"), "t_max must be > 0");
  if (c.n_out < 2) throw ConfigError("n_out", line_of("n_out"), "n_out must be >= 2");
  if (!(c.tail_eps > 0.0 && c.tail_eps <= 1e-6)) {
    throw ConfigError("tail_eps", line_of("tail_eps"), "tail_eps must lie in (0, 1e-6]");
  }
  if (!(c.dt_lo > 0.0 && c.dt_hi > c.dt_lo)) {
    throw ConfigError("dt_lo", line_of("dt_lo"), "optimizer bracket needs 0 < dt_lo < dt_hi");
  }
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace qpc::cli
