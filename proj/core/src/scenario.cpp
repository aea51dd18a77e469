#include "stripctl/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace stripctl {

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  bool eof() const { return pos >= s.size(); }
  char peek() const { return eof() ? '\0' : s[pos]; }
  char get() {
    const char c = s[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
      get();
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line, col, msg); }
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string read_ident(Cursor& c) {
  c.skip_ws();
  std::string id;
  while (!c.eof() && ident_char(c.peek())) id.push_back(c.get());
  if (id.empty()) c.fail("expected identifier");
  return id;
}

void expect(Cursor& c, char ch) {
  c.skip_ws();
  if (c.peek() != ch) c.fail(std::string("expected '") + ch + "'");
  c.get();
}

bool accept(Cursor& c, char ch) {
  c.skip_ws();
  if (c.peek() == ch) {
    c.get();
    return true;
  }
  return false;
}

struct Symbols {
  std::optional<double> L, X;
};

double parse_atom(Cursor& c, const Symbols& sym) {
  c.skip_ws();
  if (std::isalpha(static_cast<unsigned char>(c.peek()))) {
    const int line = c.line, col = c.col;
    const std::string id = read_ident(c);
    if (id == "pi") return kPi;
    if (id == "inf") return kInf;
    if (id == "L") {
      if (!sym.L) throw ParseError(line, col, "symbol 'L' is not bound here");
      return *sym.L;
    }
    if (id == "X") {
      if (!sym.X) throw ParseError(line, col, "symbol 'X' is not bound here");
      return *sym.X;
    }
    throw ParseError(line, col, "unknown symbol '" + id + "'");
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(c.s.substr(c.pos), &used);
  } catch (const std::exception&) {
    c.fail("expected number");
  }
  for (std::size_t i = 0; i < used; ++i) c.get();
  return v;
}

double parse_number(Cursor& c, const Symbols& sym) {
  c.skip_ws();
  double sign = 1.0;
  while (accept(c, '-')) sign = -sign;
  double v = parse_atom(c, sym);
  while (true) {
    c.skip_ws();
    if (accept(c, '*')) {
      v *= parse_atom(c, sym);
    } else if (accept(c, '/')) {
      v /= parse_atom(c, sym);
    } else {
      break;
    }
  }
  return sign * v;
}

double parse_number_text(const std::string& text, int line, int col, const Symbols& sym) {
  Cursor c{text, 0, line, col};
  const double v = parse_number(c, sym);
  c.skip_ws();
  if (!c.eof()) c.fail("trailing characters after number");
  return v;
}

// ---- set expressions ----

Interval parse_interval(Cursor& c, const Symbols& sym, int axis, int d, double L) {
  c.skip_ws();
  if (accept(c, '*')) {
    if (axis < d - 1) return {0.0, 2.0 * kPi * L};
    return {-kInf, kInf};
  }
  expect(c, '[');
  const double lo = parse_number(c, sym);
  expect(c, ',');
  const double hi = parse_number(c, sym);
  expect(c, ']');
  return {lo, hi};
}

std::vector<Box> parse_box_list(Cursor& c, const Symbols& sym, int ivs_per_box, int d,
                                double L) {
  std::vector<Box> boxes;
  while (true) {
    Box b;
    b.iv.reserve(static_cast<std::size_t>(ivs_per_box));
    for (int j = 0; j < ivs_per_box; ++j) {
      if (j > 0) expect(c, ',');
      b.iv.push_back(parse_interval(c, sym, j, d, L));
    }
    boxes.push_back(std::move(b));
    if (!accept(c, ';')) break;
  }
  return boxes;
}

SetDescription parse_expr(Cursor& c, const StripDomain& domain) {
  const int d = domain.dimension();
  const double L = domain.scale();
  Symbols sym{domain.scale(), domain.half_width()};
  c.skip_ws();
  const int line = c.line, col = c.col;
  const std::string head = read_ident(c);

  if (head == "empty") return SetDescription::empty(d);
  if (head == "all") return SetDescription::full(d);
  if (head == "strip") {
    Box section;
    section.iv.assign(static_cast<std::size_t>(d - 1), Interval{0.0, 2.0 * kPi * L});
    return SetDescription::product_section(d, {section});
  }
  if (head == "box" || head == "boxes") {
    expect(c, '{');
    auto boxes = parse_box_list(c, sym, d, d, L);
    expect(c, '}');
    if (head == "box" && boxes.size() != 1)
      throw ParseError(line, col, "'box' takes exactly one box; use 'boxes'");
    return SetDescription::box_union(d, std::move(boxes));
  }
  if (head == "section") {
    expect(c, '{');
    auto boxes = parse_box_list(c, sym, d - 1, d, L);
    expect(c, '}');
    return SetDescription::product_section(d, std::move(boxes));
  }
  if (head == "stripes") {
    expect(c, '{');
    double period = 0.0, swidth = 0.0, phase = 0.0;
    bool saw_period = false, saw_width = false;
    while (true) {
      const std::string key = read_ident(c);
      expect(c, '=');
      const double v = parse_number(c, sym);
      if (key == "period") {
        period = v;
        saw_period = true;
      } else if (key == "width") {
        swidth = v;
        saw_width = true;
      } else if (key == "phase") {
        phase = v;
      } else {
        throw ParseError(line, col, "stripes keys are period, width, phase");
      }
      if (!accept(c, ',')) break;
    }
    expect(c, '}');
    if (!saw_period || !saw_width)
      throw ParseError(line, col, "stripes require period and width");
    return SetDescription::stripes(d, L, period, swidth, phase);
  }
  if (head == "periodic") {
    expect(c, '{');
    std::string key = read_ident(c);
    if (key != "cell") throw ParseError(line, col, "periodic requires cell=...");
    expect(c, '=');
    SetDescription cell = parse_expr(c, domain);
    expect(c, ',');
    key = read_ident(c);
    if (key != "periods") throw ParseError(line, col, "periodic requires periods=[...]");
    expect(c, '=');
    expect(c, '[');
    std::vector<std::optional<double>> periods;
    while (true) {
      c.skip_ws();
      if (std::isalpha(static_cast<unsigned char>(c.peek()))) {
        const std::string word = read_ident(c);
        if (word != "none") c.fail("expected a period or 'none'");
        periods.push_back(std::nullopt);
      } else {
        periods.push_back(parse_number(c, sym));
      }
      if (!accept(c, ',')) break;
    }
    expect(c, ']');
    expect(c, '}');
    return SetDescription::periodic(std::move(cell), std::move(periods));
  }
  if (head == "union" || head == "intersect") {
    expect(c, '{');
    std::vector<SetDescription> parts;
    parts.push_back(parse_expr(c, domain));
    while (accept(c, ';')) parts.push_back(parse_expr(c, domain));
    expect(c, '}');
    SetDescription acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i)
      acc = head == "union" ? SetDescription::set_union(acc, parts[i])
                            : SetDescription::set_intersection(acc, parts[i]);
    return acc;
  }
  if (head == "complement") {
    expect(c, '{');
    SetDescription inner = parse_expr(c, domain);
    expect(c, '}');
    return SetDescription::set_complement(inner);
  }
  throw ParseError(line, col, "unknown set constructor '" + head + "'");
}

}  // namespace

SetDescription parse_set_expression(const std::string& text, const StripDomain& domain,
                                    int line, int col) {
  Cursor c{text, 0, line, col};
  SetDescription s = parse_expr(c, domain);
  c.skip_ws();
  if (!c.eof()) c.fail("trailing characters after set expression");
  return s;
}

const Config::Entry& Config::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw FieldError(key, "missing");
  return it->second;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

double Config::number(const std::string& key) const {
  const Entry& e = entry(key);
  Symbols sym{L_, X_};
  try {
    return parse_number_text(e.raw, e.line, e.col, sym);
  } catch (const ParseError& pe) {
    throw FieldError(key, pe.what());
  }
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int Config::integer(const std::string& key) const {
  const double v = number(key);
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) throw FieldError(key, "expected an integer");
  return static_cast<int>(r);
}

int Config::integer(const std::string& key, int fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Config::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& raw = entry(key).raw;
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw FieldError(key, "expected true/false");
}

std::string Config::text(const std::string& key) const { return entry(key).raw; }

std::string Config::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? entry(key).raw : fallback;
}

std::vector<double> Config::number_list(const std::string& key) const {
  const Entry& e = entry(key);
  Symbols sym{L_, X_};
  Cursor c{e.raw, 0, e.line, e.col};
  std::vector<double> out;
  try {
    expect(c, '[');
    while (true) {
      out.push_back(parse_number(c, sym));
      if (!accept(c, ',')) break;
    }
    expect(c, ']');
    c.skip_ws();
    if (!c.eof()) c.fail("trailing characters after list");
  } catch (const ParseError& pe) {
    throw FieldError(key, pe.what());
  }
  return out;
}

std::vector<double> Config::sweep_values(const std::string& key) const {
  const Entry& e = entry(key);
  Symbols sym{L_, X_};
  Cursor c{e.raw, 0, e.line, e.col};
  std::vector<double> out;
  try {
    c.skip_ws();
    if (c.peek() == '{') {
      c.get();
      while (true) {
        out.push_back(parse_number(c, sym));
        if (!accept(c, ',')) break;
      }
      expect(c, '}');
    } else {
      const std::string word = read_ident(c);
      if (word != "range") c.fail("expected '{...}' or range(lo, hi, step)");
      expect(c, '(');
      const double lo = parse_number(c, sym);
      expect(c, ',');
      const double hi = parse_number(c, sym);
      expect(c, ',');
      const double step = parse_number(c, sym);
      expect(c, ')');
      if (!(step > 0.0)) c.fail("range step must be positive");
      for (double v = lo; v <= hi + 1e-12 * std::max(1.0, std::abs(hi)); v += step)
        out.push_back(v);
    }
    c.skip_ws();
    if (!c.eof()) c.fail("trailing characters after sweep values");
  } catch (const ParseError& pe) {
    throw FieldError(key, pe.what());
  }
  if (out.empty()) throw FieldError(key, "empty sweep range");
  return out;
}

Config parse_config(const std::string& text) {
  Config cfg;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments
    std::string body = line;
    const std::size_t hash = body.find('#');
    if (hash != std::string::npos) body = body.substr(0, hash);
    // trim
    const auto is_ws = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; };
    std::size_t begin = 0, end = body.size();
    while (begin < end && is_ws(body[begin])) ++begin;
    while (end > begin && is_ws(body[end - 1])) --end;
    if (begin == end) continue;
    const std::size_t eq = body.find('=', begin);
    if (eq == std::string::npos || eq >= end)
      throw ParseError(line_no, static_cast<int>(begin) + 1, "expected 'key = value'");
    std::size_t key_end = eq;
    while (key_end > begin && is_ws(body[key_end - 1])) --key_end;
    const std::string key = body.substr(begin, key_end - begin);
    if (key.empty()) throw ParseError(line_no, static_cast<int>(begin) + 1, "empty key");
    for (char ch : key)
      if (!ident_char(ch) && ch != '.')
        throw ParseError(line_no, static_cast<int>(begin) + 1,
                         "key may contain identifiers and dots only");
    std::size_t val_begin = eq + 1;
    while (val_begin < end && is_ws(body[val_begin])) ++val_begin;
    if (val_begin >= end)
      throw ParseError(line_no, static_cast<int>(eq) + 2, "missing value");
    Config::Entry e;
    e.raw = body.substr(val_begin, end - val_begin);
    e.line = line_no;
    e.col = static_cast<int>(val_begin) + 1;
    if (cfg.has(key)) throw ParseError(line_no, static_cast<int>(begin) + 1,
                                       "duplicate key '" + key + "'");
    cfg.set(key, std::move(e));
  }
  return cfg;
}

std::string to_string(Task t) {
  switch (t) {
    case Task::Thickness: return "thickness";
    case Task::SpectralCheck: return "spectral-check";
    case Task::Dissipation: return "dissipation";
    case Task::CostBound: return "cost-bound";
    case Task::Hum: return "hum";
    case Task::Lr: return "lr";
    case Task::Observability: return "observability";
    case Task::Necessity: return "necessity";
    case Task::KernelCheck: return "kernel-check";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::Thickness, Task::SpectralCheck, Task::Dissipation, Task::CostBound,
                 Task::Hum, Task::Lr, Task::Observability, Task::Necessity,
                 Task::KernelCheck})
    if (to_string(t) == name) return t;
  throw FieldError("task", "unknown task '" + name + "'");
}

bool Scenario::needs_set() const {
  switch (task) {
    case Task::CostBound:
    case Task::Dissipation:
    case Task::KernelCheck:
      return false;
    default:
      return true;
  }
}

SetDescription Scenario::build_set(const StripDomain& dom) const {
  if (set_expression.empty()) throw FieldError("set", "missing");
  const Config::Entry& e = config.entry("set");
  return parse_set_expression(set_expression, dom, e.line, e.col);
}

Scenario load_scenario(const std::string& text, const std::string& default_name) {
  Scenario sc;
  sc.config = parse_config(text);
  Config& cfg = sc.config;

  sc.name = cfg.text("name", default_name);
  sc.task = parse_task(cfg.text("task"));

  sc.domain.d = cfg.integer("domain.d", 2);
  sc.domain.L = cfg.number("domain.L", 1.0);
  const std::string bc = cfg.text("domain.bc", "dirichlet");
  if (bc == "dirichlet")
    sc.domain.bc = BoundaryCondition::Dirichlet;
  else if (bc == "neumann")
    sc.domain.bc = BoundaryCondition::Neumann;
  else
    throw FieldError("domain.bc", "expected dirichlet or neumann");
  sc.domain.X = cfg.number("domain.X", 8.0);
  sc.domain.n_max = cfg.integer("domain.N_max", 16);
  sc.domain.m_max = cfg.integer("domain.M_max", 128);
  sc.domain.h = cfg.number("domain.h", 0.05);
  cfg.bind_symbols(sc.domain.L, sc.domain.X);

  sc.seed = static_cast<std::uint64_t>(cfg.number("seed", 1.0));

  try {
    StripDomain dom(sc.domain);  // validation
    if (cfg.has("set")) {
      sc.set_expression = cfg.text("set");
      (void)sc.build_set(dom);  // parse now so errors surface before running
    } else if (sc.needs_set()) {
      throw FieldError("set", "missing (required by task '" + to_string(sc.task) + "')");
    }
  } catch (const std::invalid_argument& e) {
    throw FieldError("domain", e.what());
  }
  return sc;
}

}  // namespace stripctl
