#pragma once

// Run configuration: flat "key = value" lines with dotted sections,
// '#' comments, complex numbers written a+bi. Example:
//
//   model.type = explicit
//   model.N = 64
//   model.n = 64
//   model.profile = 1
//   command = solve
//   command.z = -1, i, 2i

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detequiv/error.hpp"
#include "detequiv/matrix_io.hpp"
#include "detequiv/model.hpp"
#include "detequiv/montecarlo.hpp"
#include "detequiv/solver.hpp"

namespace detequiv {

enum class Command { solve, density, capacity, validate, demo };
enum class CapacityMode { closed_form, quadrature, both };

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;

  std::vector<double> points() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
      out[static_cast<std::size_t>(k)] =
          count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    return out;
  }
  bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
  // model
  ModelKind model_type = ModelKind::explicit_;
  ScalarField field = ScalarField::real;
  Eigen::Index N = 0;  // 0 = taken from the data
  Eigen::Index n = 0;
  std::string profile;  // scalar, "sine_bump" or CSV path
  std::string a = "0";  // "0", "tiled_identity" or CSV path
  std::string d;        // scalar, inline list or CSV path
  std::string d_tilde;
  FieldTaps taps;
  std::string b = "0";  // "0" or CSV path
  BlockVariant variant = BlockVariant::upsilon;
  std::string lambdas;  // scalar, inline list or CSV path

  // command
  Command command = Command::solve;
  std::vector<Complex> z;
  std::optional<GridSpec> grid;
  std::optional<double> eta;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> sigma2;
  CapacityMode method = CapacityMode::closed_form;
  double quad_tol = 1e-8;
  int trials = 20;
  std::uint64_t seed = 0;
  Distribution distribution = Distribution::gaussian;
  std::vector<Eigen::Index> n_list;
  double gap_threshold = 0.02;
  Complex mc_z = -1.0;
  int bins = 48;
  bool demo_density = false;

  SolverConfig solver;
  std::string out_dir = ".";

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline const std::map<std::string, ModelKind, std::less<>>& model_names() {
  static const std::map<std::string, ModelKind, std::less<>> m{
      {"explicit", ModelKind::explicit_}, {"separable", ModelKind::separable},
      {"gaussian_field", ModelKind::gaussian_field}, {"block_example", ModelKind::block_example},
      {"dx", ModelKind::dx}};
  return m;
}

inline const std::map<std::string, Command, std::less<>>& command_names() {
  static const std::map<std::string, Command, std::less<>> m{
      {"solve", Command::solve}, {"density", Command::density}, {"capacity", Command::capacity},
      {"validate", Command::validate}, {"demo", Command::demo}};
  return m;
}

template <typename E>
std::string name_of(const std::map<std::string, E, std::less<>>& names, E value) {
  for (const auto& [k, v] : names)
    if (v == value) return k;
  return "?";
}

constexpr unsigned bit(ModelKind k) { return 1u << static_cast<unsigned>(k); }
constexpr unsigned bit(Command c) { return 1u << static_cast<unsigned>(c); }
constexpr unsigned kAllModels = 0x1Fu;
constexpr unsigned kAllCommands = 0x1Fu;

struct KeyRule {
  std::string_view key;
  unsigned models;
  unsigned commands;
};

inline const std::vector<KeyRule>& key_rules() {
  using MK = ModelKind;
  using C = Command;
  static const std::vector<KeyRule> rules{
      {"model.type", kAllModels, kAllCommands},
      {"model.field", bit(MK::explicit_) | bit(MK::separable), kAllCommands},
      {"model.N", bit(MK::explicit_) | bit(MK::separable) | bit(MK::gaussian_field) | bit(MK::dx),
       kAllCommands},
      {"model.n", kAllModels, kAllCommands},
      {"model.profile", bit(MK::explicit_), kAllCommands},
      {"model.A", bit(MK::explicit_) | bit(MK::separable), kAllCommands},
      {"model.d", bit(MK::separable), kAllCommands},
      {"model.d_tilde", bit(MK::separable), kAllCommands},
      {"model.taps", bit(MK::gaussian_field), kAllCommands},
      {"model.B", bit(MK::gaussian_field), kAllCommands},
      {"model.variant", bit(MK::block_example), kAllCommands},
      {"model.lambdas", bit(MK::dx), kAllCommands},
      {"command", kAllModels, kAllCommands},
      {"command.z", kAllModels, bit(C::solve) | bit(C::validate)},
      {"command.grid", kAllModels, bit(C::density)},
      {"command.eta", kAllModels, bit(C::density)},
      {"command.intervals", kAllModels, bit(C::density)},
      {"command.sigma2", kAllModels, bit(C::capacity) | bit(C::validate)},
      {"command.method", kAllModels, bit(C::capacity)},
      {"command.quad_tol", kAllModels, bit(C::capacity) | bit(C::validate)},
      {"command.trials", kAllModels, bit(C::validate) | bit(C::demo)},
      {"command.seed", kAllModels, bit(C::validate) | bit(C::demo)},
      {"command.distribution", kAllModels, bit(C::validate) | bit(C::demo)},
      {"command.n_list", kAllModels, bit(C::validate)},
      {"command.gap_threshold", kAllModels, bit(C::validate)},
      {"command.mc_z", kAllModels, bit(C::validate)},
      {"command.bins", kAllModels, bit(C::demo)},
      {"command.density", kAllModels, bit(C::demo)},
      {"solver.tol", kAllModels, kAllCommands},
      {"solver.max_iter", kAllModels, kAllCommands},
      {"solver.damping", kAllModels, kAllCommands},
      {"solver.anderson_depth", kAllModels, kAllCommands},
      {"solver.continuation_start_height", kAllModels, kAllCommands},
      {"output.dir", kAllModels, kAllCommands},
  };
  return rules;
}

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] inline void schema_error(std::string_view key, int line, const std::string& msg) {
  throw Error(Errc::SchemaError, "line " + std::to_string(line) + ", key '" + std::string(key) +
                                     "': " + msg);
}

inline std::string normalize_minus(std::string_view s) {
  // accept the typographic minus sign U+2212
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k + 2 < s.size() && static_cast<unsigned char>(s[k]) == 0xE2 &&
        static_cast<unsigned char>(s[k + 1]) == 0x88 && static_cast<unsigned char>(s[k + 2]) == 0x92) {
      out += '-';
      k += 2;
    } else {
      out += s[k];
    }
  }
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(std::string_view key, const Entry& e, std::string_view text) {
  double v = 0.0;
  if (!parse_double(text, v) || !std::isfinite(v)) schema_error(key, e.line, "expected a real number, got '" + std::string(text) + "'");
  return v;
}

inline long long to_integer(std::string_view key, const Entry& e, std::string_view text) {
  const std::string_view t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    schema_error(key, e.line, "expected an integer, got '" + std::string(t) + "'");
  return v;
}

inline Complex to_complex(std::string_view key, const Entry& e, std::string_view text) {
  try {
    const Complex v = parse_scalar(text);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error(Errc::InvalidEntry, "non-finite");
    return v;
  } catch (const Error&) {
    schema_error(key, e.line, "expected a scalar, got '" + std::string(trim(text)) + "'");
  }
}

inline bool is_csv_path(std::string_view s) {
  return s.size() > 4 && s.substr(s.size() - 4) == ".csv";
}

/// Inline sources: a single real or a comma separated list.
inline void check_real_list(std::string_view key, const Entry& e) {
  if (is_csv_path(e.value)) return;
  for (const auto& item : split(e.value, ',')) {
    const double v = to_double(key, e, item);
    if (v < 0.0 && key != "model.lambdas") schema_error(key, e.line, "entries must be >= 0");
  }
}

inline std::string format_taps(const FieldTaps& taps) {
  std::string out;
  for (const auto& [lag, v] : taps) {
    if (!out.empty()) out += "; ";
    out += std::to_string(lag.first) + " " + std::to_string(lag.second) + " " + format_scalar(v);
  }
  return out;
}

}  // namespace detail

/// Parses and validates a configuration. Unknown keys, keys that do not
/// apply to the chosen model type or command, duplicates and malformed
/// values raise SchemaError naming the key and line.
inline RunConfig parse_config(std::string_view text) {
  using namespace detail;
  std::map<std::string, Entry, std::less<>> entries;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::SchemaError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    std::string value = normalize_minus(trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = std::string(trim(std::string_view(value).substr(1, value.size() - 2)));
    const auto rule = std::find_if(key_rules().begin(), key_rules().end(),
                                   [&](const KeyRule& r) { return r.key == key; });
    if (rule == key_rules().end()) schema_error(key, line_no, "unknown key");
    if (entries.count(key)) schema_error(key, line_no, "duplicate key");
    if (value.empty()) schema_error(key, line_no, "empty value");
    entries[key] = Entry{value, line_no};
  }

  RunConfig c;
  const auto get = [&](std::string_view key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  const auto require = [&](std::string_view key) -> const Entry& {
    const Entry* e = get(key);
    if (!e) throw Error(Errc::SchemaError, "missing required key '" + std::string(key) + "'");
    return *e;
  };

  {
    const Entry& e = require("model.type");
    const auto it = model_names().find(e.value);
    if (it == model_names().end()) schema_error("model.type", e.line, "unknown model type '" + e.value + "'");
    c.model_type = it->second;
  }
  {
    const Entry& e = require("command");
    const auto it = command_names().find(e.value);
    if (it == command_names().end()) schema_error("command", e.line, "unknown command '" + e.value + "'");
    c.command = it->second;
  }
  for (const auto& [key, e] : entries) {
    const auto rule = std::find_if(key_rules().begin(), key_rules().end(),
                                   [&](const KeyRule& r) { return r.key == key; });
    if (!(rule->models & bit(c.model_type)))
      schema_error(key, e.line, "does not apply to model type '" + name_of(model_names(), c.model_type) + "'");
    if (!(rule->commands & bit(c.command)))
      schema_error(key, e.line, "does not apply to command '" + name_of(command_names(), c.command) + "'");
  }
  if (c.command == Command::demo && c.model_type != ModelKind::block_example)
    schema_error("command", require("command").line, "demo runs on the block_example model");

  // model
  if (const Entry* e = get("model.field")) {
    if (e->value == "real") c.field = ScalarField::real;
    else if (e->value == "complex") c.field = ScalarField::complex;
    else schema_error("model.field", e->line, "expected real or complex");
  }
  if (c.model_type == ModelKind::gaussian_field) c.field = ScalarField::complex;
  for (const auto& [key, target] : {std::pair{"model.N", &c.N}, std::pair{"model.n", &c.n}}) {
    if (const Entry* e = get(key)) {
      const long long v = to_integer(key, *e, e->value);
      if (v < 1) schema_error(key, e->line, "must be >= 1");
      *target = static_cast<Eigen::Index>(v);
    }
  }
  switch (c.model_type) {
    case ModelKind::explicit_: {
      const Entry& e = require("model.profile");
      c.profile = e.value;
      if (!is_csv_path(c.profile) && c.profile != "sine_bump") {
        if (to_double("model.profile", e, c.profile) < 0.0) schema_error("model.profile", e.line, "must be >= 0");
      }
      if (!is_csv_path(c.profile) && (c.N == 0 || c.n == 0))
        schema_error("model.profile", e.line, "generated profiles need model.N and model.n");
      if (const Entry* a = get("model.A")) c.a = a->value;
      break;
    }
    case ModelKind::separable: {
      const Entry& d = require("model.d");
      const Entry& dt = require("model.d_tilde");
      check_real_list("model.d", d);
      check_real_list("model.d_tilde", dt);
      c.d = d.value;
      c.d_tilde = dt.value;
      if (const Entry* a = get("model.A")) c.a = a->value;
      break;
    }
    case ModelKind::gaussian_field: {
      const Entry& e = require("model.taps");
      for (const auto& item : split(e.value, ';')) {
        std::vector<std::string> parts;
        for (const auto& p : split(item, ' '))
          if (!p.empty()) parts.push_back(p);
        if (parts.size() != 3) schema_error("model.taps", e.line, "each tap is 'k1 k2 value'");
        const auto k1 = static_cast<int>(to_integer("model.taps", e, parts[0]));
        const auto k2 = static_cast<int>(to_integer("model.taps", e, parts[1]));
        if (!c.taps.emplace(std::pair{k1, k2}, to_complex("model.taps", e, parts[2])).second)
          schema_error("model.taps", e.line, "repeated lag");
      }
      if (c.N == 0 || c.n == 0) schema_error("model.taps", e.line, "gaussian_field needs model.N and model.n");
      if (const Entry* b = get("model.B")) c.b = b->value;
      break;
    }
    case ModelKind::block_example: {
      if (c.n == 0) throw Error(Errc::SchemaError, "missing required key 'model.n'");
      if (const Entry* e = get("model.variant")) {
        if (e->value == "upsilon") c.variant = BlockVariant::upsilon;
        else if (e->value == "upsilon_tilde") c.variant = BlockVariant::upsilon_tilde;
        else schema_error("model.variant", e->line, "expected upsilon or upsilon_tilde");
      }
      c.field = ScalarField::real;
      break;
    }
    case ModelKind::dx: {
      const Entry& e = require("model.lambdas");
      check_real_list("model.lambdas", e);
      c.lambdas = e.value;
      if (c.n == 0) throw Error(Errc::SchemaError, "missing required key 'model.n'");
      c.field = ScalarField::real;
      break;
    }
  }
  for (const auto* key : {"model.A", "model.B"})
    if (const Entry* e = get(key))
      if (e->value != "0" && !is_csv_path(e->value) && !(e->value == "tiled_identity" && std::string_view(key) == "model.A"))
        schema_error(key, e->line, "expected 0, tiled_identity or a .csv path");

  // command
  c.distribution = default_distribution(c.field);
  if (const Entry* e = get("command.z")) {
    for (const auto& item : split(e->value, ',')) {
      const Complex z = to_complex("command.z", *e, item);
      if (on_positive_axis(z)) schema_error("command.z", e->line, "z must lie off [0, inf)");
      c.z.push_back(z);
    }
  } else if (c.command == Command::solve) {
    require("command.z");
  }
  if (const Entry* e = get("command.grid")) {
    const auto parts = split(e->value, ':');
    if (parts.size() != 3) schema_error("command.grid", e->line, "expected lo:hi:count");
    GridSpec g{to_double("command.grid", *e, parts[0]), to_double("command.grid", *e, parts[1]),
               static_cast<int>(to_integer("command.grid", *e, parts[2]))};
    if (g.lo < 0.0 || g.count < 1 || (g.count > 1 && !(g.hi > g.lo)))
      schema_error("command.grid", e->line, "need 0 <= lo < hi and count >= 1");
    c.grid = g;
  } else if (c.command == Command::density) {
    require("command.grid");
  }
  if (const Entry* e = get("command.eta")) {
    c.eta = to_double("command.eta", *e, e->value);
    if (!(*c.eta > 0.0)) schema_error("command.eta", e->line, "must be > 0");
  }
  if (const Entry* e = get("command.intervals")) {
    for (const auto& item : split(e->value, ';')) {
      const auto ab = split(item, ':');
      if (ab.size() != 2) schema_error("command.intervals", e->line, "expected a:b; a:b");
      const double a = to_double("command.intervals", *e, ab[0]);
      const double b = to_double("command.intervals", *e, ab[1]);
      if (!(b > a)) schema_error("command.intervals", e->line, "need a < b");
      c.intervals.emplace_back(a, b);
    }
  }
  if (const Entry* e = get("command.sigma2")) {
    for (const auto& item : split(e->value, ',')) {
      const double s2 = to_double("command.sigma2", *e, item);
      if (!(s2 > 0.0)) schema_error("command.sigma2", e->line, "noise variances must be > 0");
      c.sigma2.push_back(s2);
    }
  } else if (c.command == Command::capacity) {
    require("command.sigma2");
  } else if (c.command == Command::validate) {
    c.sigma2 = {1.0};
  }
  if (const Entry* e = get("command.method")) {
    if (e->value == "closed_form") c.method = CapacityMode::closed_form;
    else if (e->value == "quadrature") c.method = CapacityMode::quadrature;
    else if (e->value == "both") c.method = CapacityMode::both;
    else schema_error("command.method", e->line, "expected closed_form, quadrature or both");
  }
  if (const Entry* e = get("command.quad_tol")) {
    c.quad_tol = to_double("command.quad_tol", *e, e->value);
    if (!(c.quad_tol > 0.0)) schema_error("command.quad_tol", e->line, "must be > 0");
  }
  if (const Entry* e = get("command.trials")) {
    const long long t = to_integer("command.trials", *e, e->value);
    if (t < 1) schema_error("command.trials", e->line, "must be >= 1");
    c.trials = static_cast<int>(t);
  }
  if (const Entry* e = get("command.seed")) {
    const std::string_view t = e->value;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
      schema_error("command.seed", e->line, "expected an unsigned 64-bit integer");
    c.seed = v;
  }
  if (const Entry* e = get("command.distribution")) {
    if (e->value == "gaussian") c.distribution = Distribution::gaussian;
    else if (e->value == "rademacher") c.distribution = Distribution::rademacher;
    else if (e->value == "circular_gaussian") c.distribution = Distribution::circular_gaussian;
    else schema_error("command.distribution", e->line, "expected gaussian, rademacher or circular_gaussian");
    try {
      SampleConfig{c.distribution, 0, 1}.validate(c.field);
    } catch (const Error& err) {
      schema_error("command.distribution", e->line, err.what());
    }
  }
  if (const Entry* e = get("command.n_list")) {
    for (const auto& item : split(e->value, ',')) {
      const long long v = to_integer("command.n_list", *e, item);
      if (v < 1) schema_error("command.n_list", e->line, "sizes must be >= 1");
      c.n_list.push_back(static_cast<Eigen::Index>(v));
    }
  }
  if (const Entry* e = get("command.gap_threshold")) {
    c.gap_threshold = to_double("command.gap_threshold", *e, e->value);
    if (!(c.gap_threshold > 0.0)) schema_error("command.gap_threshold", e->line, "must be > 0");
  }
  if (const Entry* e = get("command.mc_z")) {
    c.mc_z = to_complex("command.mc_z", *e, e->value);
    if (on_positive_axis(c.mc_z)) schema_error("command.mc_z", e->line, "z must lie off [0, inf)");
  }
  if (const Entry* e = get("command.bins")) {
    const long long v = to_integer("command.bins", *e, e->value);
    if (v < 1) schema_error("command.bins", e->line, "must be >= 1");
    c.bins = static_cast<int>(v);
  }
  if (const Entry* e = get("command.density")) {
    if (e->value == "true") c.demo_density = true;
    else if (e->value == "false") c.demo_density = false;
    else schema_error("command.density", e->line, "expected true or false");
  }

  // solver, output
  if (const Entry* e = get("solver.tol")) c.solver.tol = to_double("solver.tol", *e, e->value);
  if (const Entry* e = get("solver.max_iter"))
    c.solver.max_iter = static_cast<int>(to_integer("solver.max_iter", *e, e->value));
  if (const Entry* e = get("solver.damping")) c.solver.damping = to_double("solver.damping", *e, e->value);
  if (const Entry* e = get("solver.anderson_depth"))
    c.solver.anderson_depth = static_cast<int>(to_integer("solver.anderson_depth", *e, e->value));
  if (const Entry* e = get("solver.continuation_start_height"))
    c.solver.continuation_start_height = to_double("solver.continuation_start_height", *e, e->value);
  try {
    c.solver.validate();
  } catch (const Error& err) {
    throw Error(Errc::SchemaError, std::string("solver section: ") + err.what());
  }
  if (const Entry* e = get("output.dir")) c.out_dir = e->value;
  return c;
}

/// Canonical text form; parse_config(render_config(c)) == c.
inline std::string render_config(const RunConfig& c) {
  using namespace detail;
  std::string out;
  const auto put = [&out](std::string_view key, const std::string& value) {
    out += std::string(key) + " = " + value + "\n";
  };
  const auto join_real = [](const std::vector<double>& xs) {
    std::string s;
    for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? ", " : "") + format_real(xs[k]);
    return s;
  };
  put("model.type", name_of(model_names(), c.model_type));
  switch (c.model_type) {
    case ModelKind::explicit_:
      put("model.field", std::string(to_string(c.field)));
      if (c.N) put("model.N", std::to_string(c.N));
      if (c.n) put("model.n", std::to_string(c.n));
      put("model.profile", c.profile);
      put("model.A", c.a);
      break;
    case ModelKind::separable:
      put("model.field", std::string(to_string(c.field)));
      if (c.N) put("model.N", std::to_string(c.N));
      if (c.n) put("model.n", std::to_string(c.n));
      put("model.d", c.d);
      put("model.d_tilde", c.d_tilde);
      put("model.A", c.a);
      break;
    case ModelKind::gaussian_field:
      put("model.N", std::to_string(c.N));
      put("model.n", std::to_string(c.n));
      put("model.taps", format_taps(c.taps));
      put("model.B", c.b);
      break;
    case ModelKind::block_example:
      put("model.n", std::to_string(c.n));
      put("model.variant", c.variant == BlockVariant::upsilon ? "upsilon" : "upsilon_tilde");
      break;
    case ModelKind::dx:
      if (c.N) put("model.N", std::to_string(c.N));
      put("model.n", std::to_string(c.n));
      put("model.lambdas", c.lambdas);
      break;
  }
  put("command", name_of(command_names(), c.command));
  if (!c.z.empty()) {
    std::string s;
    for (std::size_t k = 0; k < c.z.size(); ++k) s += (k ? ", " : "") + format_scalar(c.z[k]);
    put("command.z", s);
  }
  switch (c.command) {
    case Command::solve:
      break;
    case Command::density:
      put("command.grid", format_real(c.grid->lo) + ":" + format_real(c.grid->hi) + ":" + std::to_string(c.grid->count));
      if (c.eta) put("command.eta", format_real(*c.eta));
      if (!c.intervals.empty()) {
        std::string s;
        for (std::size_t k = 0; k < c.intervals.size(); ++k)
          s += (k ? "; " : "") + format_real(c.intervals[k].first) + ":" + format_real(c.intervals[k].second);
        put("command.intervals", s);
      }
      break;
    case Command::capacity:
      put("command.sigma2", join_real(c.sigma2));
      put("command.method", c.method == CapacityMode::closed_form ? "closed_form"
                            : c.method == CapacityMode::quadrature ? "quadrature" : "both");
      put("command.quad_tol", format_real(c.quad_tol));
      break;
    case Command::validate:
    case Command::demo:
      if (c.command == Command::validate) {
        put("command.sigma2", join_real(c.sigma2));
        put("command.quad_tol", format_real(c.quad_tol));
      }
      put("command.trials", std::to_string(c.trials));
      put("command.seed", std::to_string(c.seed));
      put("command.distribution", std::string(to_string(c.distribution)));
      if (c.command == Command::validate) {
        if (!c.n_list.empty()) {
          std::string s;
          for (std::size_t k = 0; k < c.n_list.size(); ++k) s += (k ? ", " : "") + std::to_string(c.n_list[k]);
          put("command.n_list", s);
        }
        put("command.gap_threshold", format_real(c.gap_threshold));
        put("command.mc_z", format_scalar(c.mc_z));
      } else {
        put("command.bins", std::to_string(c.bins));
        put("command.density", c.demo_density ? "true" : "false");
      }
      break;
  }
  put("solver.tol", format_real(c.solver.tol));
  put("solver.max_iter", std::to_string(c.solver.max_iter));
  put("solver.damping", format_real(c.solver.damping));
  put("solver.anderson_depth", std::to_string(c.solver.anderson_depth));
  if (c.solver.continuation_start_height)
    put("solver.continuation_start_height", format_real(*c.solver.continuation_start_height));
  put("output.dir", c.out_dir);
  return out;
}

}  // namespace detequiv
