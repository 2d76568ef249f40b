#pragma once

// Run configuration shared by all subcommands, and its flat key=value file
// format. Keys are the long flag names without the leading dashes.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ikratio/verify.hpp"

namespace ikratio::cli {

enum class Command { tabulate, verify, sharpness, conjecture, explore };

// Configuration problems map to exit code 2.
class usage_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::tabulate;

  double nu_min = -1.0;
  double nu_max = 20.0;
  double nu_step = 0.25;
  double x_min = 1e-3;
  double x_max = 1e3;
  long x_points = 121;
  // a single order and/or argument replaces the corresponding grid axis
  std::optional<double> nu;
  std::optional<double> x;

  double tol = 1e-12;
  double mono_tol = 1e-9;
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  double a = 0.0;
  double x0 = 1.0;
  double y0 = 0.0;
  double x_lo = 0.05;
  double x_hi = 30.0;
  long mixed_samples = 0;

  std::string corrupt_claim;

  bool operator==(const RunConfig&) const = default;
};

inline std::string_view command_name(Command c) {
  switch (c) {
  case Command::tabulate:
    return "tabulate";
  case Command::verify:
    return "verify";
  case Command::sharpness:
    return "sharpness";
  case Command::conjecture:
    return "conjecture";
  case Command::explore:
    return "explore";
  }
  return "?";
}

inline Command parse_command(std::string_view s) {
  for (Command c : {Command::tabulate, Command::verify, Command::sharpness, Command::conjecture,
                    Command::explore})
    if (command_name(c) == s)
      return c;
  throw usage_error("unknown command '" + std::string(s) + "'");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw usage_error("invalid value '" + std::string(text) + "' for '" + std::string(key) + "'");
  return value;
}

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class T>
Field number_field(std::string_view key, T RunConfig::*member) {
  return {[key, member](RunConfig& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
          [member](const RunConfig& c) -> std::optional<std::string> {
            if constexpr (std::is_floating_point_v<T>)
              return format_number(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

inline Field optional_field(std::string_view key, std::optional<double> RunConfig::*member) {
  return {[key, member](RunConfig& c, std::string_view v) {
            c.*member = parse_number<double>(key, v);
          },
          [member](const RunConfig& c) -> std::optional<std::string> {
            if (!(c.*member))
              return std::nullopt;
            return format_number(*(c.*member));
          }};
}

inline Field text_field(std::string RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view v) { c.*member = std::string(v); },
          [member](const RunConfig& c) -> std::optional<std::string> {
            if ((c.*member).empty())
              return std::nullopt;
            return c.*member;
          }};
}

inline const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"command",
       {[](RunConfig& c, std::string_view v) { c.command = parse_command(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          return std::string(command_name(c.command));
        }}},
      {"nu-min", number_field("nu-min", &RunConfig::nu_min)},
      {"nu-max", number_field("nu-max", &RunConfig::nu_max)},
      {"nu-step", number_field("nu-step", &RunConfig::nu_step)},
      {"x-min", number_field("x-min", &RunConfig::x_min)},
      {"x-max", number_field("x-max", &RunConfig::x_max)},
      {"x-points", number_field("x-points", &RunConfig::x_points)},
      {"nu", optional_field("nu", &RunConfig::nu)},
      {"x", optional_field("x", &RunConfig::x)},
      {"tol", number_field("tol", &RunConfig::tol)},
      {"mono-tol", number_field("mono-tol", &RunConfig::mono_tol)},
      {"out", text_field(&RunConfig::out)},
      {"seed", number_field("seed", &RunConfig::seed)},
      {"threads", number_field("threads", &RunConfig::threads)},
      {"a", number_field("a", &RunConfig::a)},
      {"x0", number_field("x0", &RunConfig::x0)},
      {"y0", number_field("y0", &RunConfig::y0)},
      {"x-lo", number_field("x-lo", &RunConfig::x_lo)},
      {"x-hi", number_field("x-hi", &RunConfig::x_hi)},
      {"mixed-samples", number_field("mixed-samples", &RunConfig::mixed_samples)},
  };
  return table;
}

} // namespace detail

inline void set_key(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = detail::fields();
  const auto it = table.find(key);
  if (it == table.end())
    throw usage_error("unknown configuration key '" + std::string(key) + "'");
  it->second.set(cfg, value);
}

// Lines of the form `key = value`; blank lines and lines starting with '#'
// are ignored.
inline void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#')
      continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw usage_error("config line " + std::to_string(number) + ": expected key = value");
    set_key(cfg, detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)));
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw usage_error("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str());
}

// Every set key, in a fixed order; parsing the result reproduces `cfg`.
// The self-test hook is deliberately not serialized.
inline std::string to_config_text(const RunConfig& cfg) {
  std::string text;
  for (const auto& [key, field] : detail::fields())
    if (auto v = field.get(cfg))
      text += key + " = " + *v + "\n";
  return text;
}

inline Grid resolve_grid(const RunConfig& cfg) {
  if (cfg.x_points < 0)
    throw usage_error("x-points must be >= 0");
  if (!(cfg.nu_step > 0.0))
    throw usage_error("nu-step must be > 0");
  if (cfg.nu && !std::isfinite(*cfg.nu))
    throw usage_error("nu must be finite");
  if (cfg.x && !(*cfg.x > 0.0 && std::isfinite(*cfg.x)))
    throw usage_error("x must be finite and > 0");
  Grid g;
  g.exclusions = "none";
  g.nu_values = cfg.nu ? std::vector<double>{*cfg.nu}
                       : linear_steps(cfg.nu_min, cfg.nu_max, cfg.nu_step);
  if (cfg.x) {
    g.x_values = {*cfg.x};
  } else {
    if (cfg.x_points > 0 && !(cfg.x_min > 0.0 && cfg.x_max >= cfg.x_min && std::isfinite(cfg.x_max)))
      throw usage_error("x range must satisfy 0 < x-min <= x-max");
    g.x_values = cfg.x_points > 0 ? log_space(cfg.x_min, cfg.x_max, static_cast<std::size_t>(cfg.x_points))
                                  : std::vector<double>{};
  }
  return g;
}

} // namespace ikratio::cli
