#include "vardrop/config.hpp"

#include "vardrop/error.hpp"
#include "vardrop/format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace vardrop {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  fail(ErrorKind::Parameter, "config key '" + key + "': value '" + value + "' is not " + expected);
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "a nonnegative integer");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad_value(key, value, "a finite real number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  bad_value(key, value, "a boolean (true/false)");
}

struct Field {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field uint_field(const char* name, T RunConfig::*member) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*member = static_cast<T>(parse_uint(name, v)); },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(const char* name, double RunConfig::*member) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*member = parse_real(name, v); },
          [=](const RunConfig& c) { return format_real(c.*member); }};
}

Field bool_field(const char* name, bool RunConfig::*member) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*member = parse_bool(name, v); },
          [=](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"data", [](RunConfig& c, const std::string& v) { c.data = v; }, [](const RunConfig& c) { return c.data; }},
      uint_field("synth_n", &RunConfig::synth_n),
      uint_field("synth_g", &RunConfig::synth_g),
      uint_field("synth_length", &RunConfig::synth_length),
      real_field("synth_sigma", &RunConfig::synth_sigma),
      uint_field("T", &RunConfig::T),
      uint_field("H", &RunConfig::H),
      uint_field("B", &RunConfig::B),
      uint_field("stride", &RunConfig::stride),
      bool_field("shuffle", &RunConfig::shuffle),
      real_field("train_frac", &RunConfig::train_frac),
      real_field("val_frac", &RunConfig::val_frac),
      real_field("test_frac", &RunConfig::test_frac),
      uint_field("k", &RunConfig::k),
      uint_field("epsilon", &RunConfig::epsilon),
      uint_field("gs", &RunConfig::gs),
      uint_field("d", &RunConfig::d),
      uint_field("d_k", &RunConfig::d_k),
      real_field("lr", &RunConfig::lr),
      uint_field("epochs", &RunConfig::epochs),
      uint_field("seed", &RunConfig::seed),
      bool_field("vardrop_on", &RunConfig::vardrop_on),
      bool_field("normalize_windows", &RunConfig::normalize_windows),
  };
  return table;
}

constexpr double kUnbounded = 1e18;

void check_range(const std::string& key, double value, double lo, double hi) {
  if (value < lo || value > hi) {
    const std::string upper = hi >= kUnbounded ? "inf)" : format_real(hi) + "]";
    fail(ErrorKind::Parameter, "config key '" + key + "' = " + format_real(value) + " outside permitted interval [" +
                                   format_real(lo) + ", " + upper);
  }
}

}  // namespace

SynthSpec RunConfig::synth_spec() const {
  SynthSpec s;
  s.n_variates = synth_n;
  s.n_prototypes = synth_g;
  s.length = synth_length;
  s.noise_sigma = synth_sigma;
  s.seed = seed;
  s.period = T;
  s.max_bin = static_cast<int>(std::min<std::size_t>(epsilon, (T - 1) / 2));
  s.min_components = std::min<std::size_t>(std::max<std::size_t>(k, 1), 4);
  s.max_components = 4;
  return s;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.name);
    return out;
  }();
  return keys;
}

RawConfig parse_config(std::istream& in) {
  RawConfig raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + " is not key=value: '" + line + "'");
    }
    raw[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return raw;
}

RawConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path);
  return parse_config(in);
}

RunConfig validate_config(const RawConfig& raw, std::optional<std::uint64_t> fallback_seed) {
  RunConfig c;
  if (fallback_seed) c.seed = *fallback_seed;
  for (const auto& [key, value] : raw) {
    auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.name == key; });
    if (it == fields().end()) fail(ErrorKind::Parameter, "unknown config key '" + key + "'");
    it->set(c, value);
  }

  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  check_range("T", d(c.T), 2, kUnbounded);
  check_range("H", d(c.H), 1, kUnbounded);
  check_range("B", d(c.B), 1, kUnbounded);
  check_range("stride", d(c.stride), 1, kUnbounded);
  check_range("epsilon", d(c.epsilon), 1, d(c.T / 2));
  check_range("k", d(c.k), 1, d(c.epsilon));
  check_range("gs", d(c.gs), 1, kUnbounded);
  check_range("d", d(c.d), 1, kUnbounded);
  check_range("d_k", d(c.d_k), 1, kUnbounded);
  check_range("epochs", d(c.epochs), 1, kUnbounded);
  check_range("lr", c.lr, 1e-12, kUnbounded);
  check_range("synth_sigma", c.synth_sigma, 0, kUnbounded);
  check_range("synth_n", d(c.synth_n), 1, kUnbounded);
  check_range("synth_g", d(c.synth_g), 1, d(c.synth_n));
  check_range("synth_length", d(c.synth_length), 1, kUnbounded);
  c.split_spec().validate();
  return c;
}

std::string config_echo(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& f : fields()) out << f.name << '=' << f.get(config) << '\n';
  return out.str();
}

}  // namespace vardrop
