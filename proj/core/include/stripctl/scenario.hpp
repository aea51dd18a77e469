#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stripctl/geometry.hpp"
#include "stripctl/strip_model.hpp"

namespace stripctl {

/// Configuration / set-expression parse failure with source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                           ": " + what),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

/// Validation failure naming the offending field.
class FieldError : public std::runtime_error {
 public:
  explicit FieldError(const std::string& field, const std::string& what)
      : std::runtime_error("field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Flat `key = value` text with dotted keys, `#` comments, and small numeric
/// expressions (products/quotients of literals, pi, and the bound symbols
/// L and X once the domain is known).
class Config {
 public:
  struct Entry {
    std::string raw;
    int line = 0;
    int col = 0;  // column where the value starts
  };

  void set(const std::string& key, Entry e) { entries_[key] = std::move(e); }
  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const Entry& entry(const std::string& key) const;
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  const std::map<std::string, Entry>& all() const { return entries_; }

  void bind_symbols(double L, double X) {
    L_ = L;
    X_ = X;
  }

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> number_list(const std::string& key) const;  // [a, b, c]
  /// sweep values: `{v1, v2, ...}` or `range(lo, hi, step)` (inclusive ends)
  std::vector<double> sweep_values(const std::string& key) const;

 private:
  std::map<std::string, Entry> entries_;
  std::optional<double> L_, X_;
};

Config parse_config(const std::string& text);

/// Small expression language for control sets; `d`, `L`, `X` come from the
/// scenario domain. Grammar (documented in the README):
///   expr     := empty | all | strip | box{iv, ...} | boxes{iv, ...; iv, ...}
///             | stripes{period=N, width=N [, phase=N]}
///             | section{iv, ...; ...}            (d-1 intervals per box)
///             | periodic{cell=expr, periods=[N|none, ...]}
///             | union{expr; expr; ...} | intersect{expr; expr; ...}
///             | complement{expr}
///   iv       := [N, N] | *          (* = full transverse extent / whole axis)
///   N        := [-] atom (('*'|'/') atom)*,  atom := number | pi | L | X | inf
SetDescription parse_set_expression(const std::string& text, const StripDomain& domain,
                                    int line = 1, int col = 1);

enum class Task {
  Thickness,
  SpectralCheck,
  Dissipation,
  CostBound,
  Hum,
  Lr,
  Observability,
  Necessity,
  KernelCheck,
};

std::string to_string(Task t);
Task parse_task(const std::string& name);

struct Scenario {
  std::string name;
  Task task = Task::Thickness;
  DomainConfig domain;
  std::string set_expression;  // empty when the task needs no set
  std::uint64_t seed = 1;
  Config config;

  StripDomain build() const { return StripDomain(domain); }
  SetDescription build_set(const StripDomain& dom) const;
  bool needs_set() const;
};

/// Parses and validates a scenario file (does not yet run it).
Scenario load_scenario(const std::string& text, const std::string& default_name);

}  // namespace stripctl
