#include "fraclab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "fraclab/analytic.hpp"
#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

using Type = ScenarioConfig::Type;
using Value = ScenarioConfig::Value;

struct KeySpec {
  const char* section;
  const char* key;
  Type type;
  std::optional<Value> fallback;  // empty means required
};

Value num(double x, Type t = Type::Real) {
  Value v;
  v.type = t;
  v.num = x;
  return v;
}
Value flag(bool b) {
  Value v;
  v.type = Type::Bool;
  v.flag = b;
  return v;
}
Value str(std::string s) {
  Value v;
  v.type = Type::String;
  v.text = std::move(s);
  return v;
}
Value nums(std::vector<double> x) {
  Value v;
  v.type = Type::RealList;
  v.nums = std::move(x);
  return v;
}
Value texts(std::vector<std::string> x) {
  Value v;
  v.type = Type::StringList;
  v.texts = std::move(x);
  return v;
}

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = {
      {"grid", "dim", Type::Int, num(2, Type::Int)},
      {"grid", "half_width", Type::Real, num(12.0)},
      {"grid", "points", Type::Int, num(256, Type::Int)},
      {"exponents", "s", Type::RealList, std::nullopt},
      {"exponents", "b", Type::RealList, nums({})},
      {"exponents", "b_imag", Type::RealList, nums({})},
      {"region", "O", Type::StringList, texts({"ball([0, 0, 0], 1.5)"})},
      {"region", "omega", Type::StringList, texts({"ball([0, 0, 0], 0.3)"})},
      {"region", "kappa", Type::Real, num(0.25)},
      {"fields", "u", Type::StringList, texts({})},
      {"fields", "x", Type::RealList, nums({0, 0, 0})},
      {"pipeline", "M_max", Type::Int, num(6, Type::Int)},
      {"pipeline", "moment_m_max", Type::Int, num(4, Type::Int)},
      {"pipeline", "delta", Type::Real, num(1e-8)},
      {"pipeline", "moment_tol", Type::Real, num(1e-4)},
      {"pipeline", "eps", Type::Real, num(0.1)},
      {"pipeline", "allow_override", Type::Bool, flag(false)},
      {"pipeline", "seed", Type::Int, num(0, Type::Int)},
      {"pipeline", "t", Type::Real, num(0.5)},
      {"pipeline", "tol", Type::Real, num(1e-5)},
      {"mellin", "u_min", Type::Real, num(-40.0)},
      {"mellin", "u_max", Type::Real, num(40.0)},
      {"mellin", "nodes", Type::Int, num(2048, Type::Int)},
      {"mellin", "tol", Type::Real, num(1e-8)},
      {"ip2", "Omega", Type::StringList, texts({"box([-1], [1])"})},
      {"ip2", "W1", Type::StringList, texts({"box([1.5], [2.5])"})},
      {"ip2", "W2", Type::StringList, texts({"box([-2.5], [-1.5])"})},
      {"ip2", "q", Type::String, str("zero()")},
      {"ip2", "n_sources", Type::Int, num(32, Type::Int)},
      {"ip2", "n_receivers", Type::Int, num(32, Type::Int)},
      {"ip2", "svd_cutoff", Type::Real, num(1e-12)},
      {"ip2", "runge_lambda", Type::Real, num(1e-4)},
      {"ip2", "eta", Type::Real, num(0.5)},
      {"ip2", "mask_level", Type::Real, num(0.5)},
      {"ip2", "tol", Type::Real, num(0.1)},
      {"ip2", "data", Type::String, str("")},
      {"symbol", "A", Type::RealList, nums({1, 0, 0, 1})},
      {"symbol", "x0", Type::RealList, nums({0, 0, 0})},
      {"symbol", "xi", Type::RealList, nums({1, 0})},
      {"symbol", "ladder", Type::RealList, nums({16, 24, 32})},
      {"symbol", "delta", Type::Real, num(8.0)},
      {"symbol", "polarize", Type::Bool, flag(true)},
      {"symbol", "tol", Type::Real, num(0.02)},
  };
  return s;
}

const KeySpec* find_spec(const std::string& section, const std::string& key) {
  for (const auto& k : schema())
    if (section == k.section && key == k.key) return &k;
  return nullptr;
}

bool section_known(const std::string& section) {
  return std::any_of(schema().begin(), schema().end(), [&](const KeySpec& k) { return section == k.section; });
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Cursor over one value expression.
struct Lexer {
  const std::string& s;
  std::size_t i = 0;
  int line;

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skip();
    return i >= s.size();
  }
  [[noreturn]] void fail(const std::string& what) { throw ParseError(what, line); }

  std::string string_lit() {
    skip();
    if (i >= s.size() || s[i] != '"') fail("expected a quoted string");
    ++i;
    std::string out;
    while (i < s.size() && s[i] != '"') {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      out += s[i++];
    }
    if (i >= s.size()) fail("unterminated string");
    ++i;
    return out;
  }

  double number() {
    skip();
    std::size_t j = i;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    bool digits = false;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j, digits = true;
    if (j < s.size() && s[j] == '.') {
      ++j;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j, digits = true;
    }
    if (!digits) fail("expected a decimal literal");
    if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
      if (k >= s.size() || !std::isdigit(static_cast<unsigned char>(s[k]))) fail("malformed exponent");
      while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
      j = k;
    }
    const double x = std::stod(s.substr(i, j - i));
    i = j;
    return x;
  }

  bool peek(char c) {
    skip();
    return i < s.size() && s[i] == c;
  }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++i;
  }
};

Value parse_value(const std::string& raw, Type want, int line) {
  Lexer lx{raw, 0, line};
  Value v;
  v.type = want;
  v.line = line;
  switch (want) {
    case Type::Int: {
      const double x = lx.number();
      if (x != std::floor(x) || raw.find_first_of(".eE") != std::string::npos) lx.fail("expected an integer");
      v.num = x;
      break;
    }
    case Type::Real:
      v.num = lx.number();
      break;
    case Type::Bool: {
      const std::string t = trim(raw);
      if (t == "true") v.flag = true;
      else if (t == "false") v.flag = false;
      else lx.fail("expected true or false");
      lx.i = raw.size();
      break;
    }
    case Type::String:
      v.text = lx.string_lit();
      break;
    case Type::RealList:
    case Type::StringList:
      lx.expect('[');
      if (!lx.peek(']')) {
        for (;;) {
          if (want == Type::RealList) v.nums.push_back(lx.number());
          else v.texts.push_back(lx.string_lit());
          if (lx.peek(',')) {
            ++lx.i;
            continue;
          }
          break;
        }
      }
      lx.expect(']');
      break;
  }
  if (!lx.done()) lx.fail("trailing characters after value");
  return v;
}

std::string render(const Value& v) {
  switch (v.type) {
    case Type::Int: return fmt(v.num);
    case Type::Real: {
      std::string s = fmt(v.num);
      // Keep reals recognisable as such.
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    case Type::Bool: return v.flag ? "true" : "false";
    case Type::String: return quote(v.text);
    case Type::RealList: {
      std::string s = "[";
      for (std::size_t i = 0; i < v.nums.size(); ++i) s += (i ? ", " : "") + fmt(v.nums[i]);
      return s + "]";
    }
    case Type::StringList: {
      std::string s = "[";
      for (std::size_t i = 0; i < v.texts.size(); ++i) s += (i ? ", " : "") + quote(v.texts[i]);
      return s + "]";
    }
  }
  return "";
}

// Removes a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
  bool in = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in) {
      ++i;
      continue;
    }
    if (s[i] == '"') in = !in;
    if (s[i] == '#' && !in) return s.substr(0, i);
  }
  return s;
}

}  // namespace

bool ScenarioConfig::Value::operator==(const Value& o) const {
  // Line numbers are provenance, not content.
  return type == o.type && num == o.num && flag == o.flag && text == o.text && nums == o.nums && texts == o.texts;
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
  ScenarioConfig c;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError("malformed section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!section_known(section)) throw ParseError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    if (section.empty()) throw ParseError("key outside of any section", line);
    const std::string key = trim(s.substr(0, eq));
    const KeySpec* spec = find_spec(section, key);
    if (!spec) throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
    if (c.data_[section].count(key)) throw ParseError("duplicate key '" + key + "'", line);
    c.data_[section][key] = parse_value(s.substr(eq + 1), spec->type, line);
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw PreconditionError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string ScenarioConfig::serialize() const {
  std::string out, current;
  for (const auto& k : schema()) {
    auto sit = data_.find(k.section);
    if (sit == data_.end()) continue;
    auto kit = sit->second.find(k.key);
    if (kit == sit->second.end()) continue;
    if (current != k.section) {
      if (!current.empty()) out += "\n";
      out += "[" + std::string(k.section) + "]\n";
      current = k.section;
    }
    out += std::string(k.key) + " = " + render(kit->second) + "\n";
  }
  return out;
}

bool ScenarioConfig::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key);
}

int ScenarioConfig::line(const std::string& section, const std::string& key) const {
  return has(section, key) ? data_.at(section).at(key).line : 0;
}

const Value& ScenarioConfig::get(const std::string& section, const std::string& key, Type t) const {
  const KeySpec* spec = find_spec(section, key);
  if (!spec) throw PreconditionError("no such key " + section + "." + key);
  if (spec->type != t) throw PreconditionError("key " + section + "." + key + " has another type");
  if (has(section, key)) return data_.at(section).at(key);
  if (!spec->fallback) throw ParseError("missing required key " + section + "." + key, 0);
  return *spec->fallback;
}

int ScenarioConfig::integer(const std::string& s, const std::string& k) const {
  return static_cast<int>(get(s, k, Type::Int).num);
}
double ScenarioConfig::real(const std::string& s, const std::string& k) const { return get(s, k, Type::Real).num; }
bool ScenarioConfig::boolean(const std::string& s, const std::string& k) const { return get(s, k, Type::Bool).flag; }
std::string ScenarioConfig::text(const std::string& s, const std::string& k) const {
  return get(s, k, Type::String).text;
}
std::vector<double> ScenarioConfig::reals(const std::string& s, const std::string& k) const {
  return get(s, k, Type::RealList).nums;
}
std::vector<std::string> ScenarioConfig::texts(const std::string& s, const std::string& k) const {
  return get(s, k, Type::StringList).texts;
}

void ScenarioConfig::set(const std::string& section, const std::string& key, Value v) {
  const KeySpec* spec = find_spec(section, key);
  if (!spec) throw PreconditionError("no such key " + section + "." + key);
  if (spec->type != v.type) throw PreconditionError("key " + section + "." + key + " has another type");
  v.line = 0;
  data_[section][key] = std::move(v);
}

void ScenarioConfig::set_real(const std::string& section, const std::string& key, double x) {
  set(section, key, num(x));
}

// ---------------------------------------------------------------------------

Shape parse_shape(const std::string& text) {
  Lexer lx{text, 0, 0};
  lx.skip();
  std::size_t j = lx.i;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
  const std::string name = text.substr(lx.i, j - lx.i);
  lx.i = j;
  auto vec = [&]() {
    Point p{};
    lx.expect('[');
    for (int d = 0; d < 3; ++d) {
      p[d] = lx.number();
      if (!lx.peek(',')) break;
      ++lx.i;
    }
    lx.expect(']');
    return p;
  };
  lx.expect('(');
  Shape s;
  if (name == "ball") {
    const Point c = vec();
    lx.expect(',');
    const double r = lx.number();
    if (!(r > 0.0)) throw DomainError("ball radius must be positive");
    s = Shape::ball(c, r);
  } else if (name == "box") {
    const Point lo = vec();
    lx.expect(',');
    const Point hi = vec();
    for (int d = 0; d < 3; ++d)
      if (hi[d] < lo[d]) throw DomainError("box corners out of order");
    s = Shape::box(lo, hi);
  } else {
    throw DomainError("unknown shape '" + name + "'");
  }
  lx.expect(')');
  if (!lx.done()) throw DomainError("trailing characters in shape");
  return s;
}

std::string shape_to_string(const Shape& s, int dim) {
  auto vec = [&](const Point& p) {
    std::string out = "[";
    for (int d = 0; d < dim; ++d) out += (d ? ", " : "") + fmt(p[d]);
    return out + "]";
  };
  if (s.kind == Shape::Kind::Ball) return "ball(" + vec(s.a) + ", " + fmt(s.radius) + ")";
  return "box(" + vec(s.a) + ", " + vec(s.b) + ")";
}

namespace {

template <class F>
auto at_line(const ScenarioConfig& c, const std::string& s, const std::string& k, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(s + "." + k + ": " + e.what(), c.line(s, k));
  }
}

std::vector<Shape> shapes(const ScenarioConfig& c, const std::string& s, const std::string& k) {
  return at_line(c, s, k, [&] {
    std::vector<Shape> out;
    for (const auto& t : c.texts(s, k)) out.push_back(parse_shape(t));
    return out;
  });
}

}  // namespace

GridSpec grid_of(const ScenarioConfig& c) {
  return at_line(c, "grid", "dim", [&] {
    return GridSpec::make(c.integer("grid", "dim"), c.real("grid", "half_width"), c.integer("grid", "points"));
  });
}

TimeQuadrature quadrature_of(const ScenarioConfig& c) {
  return at_line(c, "mellin", "nodes", [&] {
    TimeQuadrature q;
    q.u_min = c.real("mellin", "u_min");
    q.u_max = c.real("mellin", "u_max");
    q.nodes = c.integer("mellin", "nodes");
    q.target_tol = c.real("mellin", "tol");
    q.validate();
    return q;
  });
}

ExponentConfig exponents_of(const ScenarioConfig& c) {
  return at_line(c, "exponents", "s", [&] {
    const auto s = c.reals("exponents", "s");
    auto b = c.reals("exponents", "b");
    auto bi = c.reals("exponents", "b_imag");
    if (b.empty()) b.assign(s.size(), 1.0);
    if (bi.empty()) bi.assign(s.size(), 0.0);
    if (b.size() != s.size() || bi.size() != s.size()) throw PreconditionError("s, b and b_imag lengths differ");
    std::vector<ExponentTerm> terms;
    for (std::size_t i = 0; i < s.size(); ++i) terms.push_back({s[i], cplx(b[i], bi[i])});
    return ExponentConfig(terms);
  });
}

RegionSpec region_of(const ScenarioConfig& c) {
  RegionSpec r;
  r.O = shapes(c, "region", "O");
  r.omega = shapes(c, "region", "omega");
  r.kappa = c.real("region", "kappa");
  return r;
}

std::vector<Field> fields_of(const ScenarioConfig& c, const GridSpec& g) {
  return at_line(c, "fields", "u", [&] {
    std::vector<Field> out;
    for (const auto& t : c.texts("fields", "u")) out.push_back(sample_analytic(g, AnalyticSpec::parse(t)));
    return out;
  });
}

Point point_of(const std::vector<double>& v) {
  if (v.size() > 3) throw DomainError("points have at most three coordinates");
  Point p{};
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i];
  return p;
}

ExteriorProblem ip2_problem_of(const ScenarioConfig& c) {
  ExteriorProblem p;
  p.grid = grid_of(c);
  p.Omega = shapes(c, "ip2", "Omega");
  p.W1 = shapes(c, "ip2", "W1");
  p.W2 = shapes(c, "ip2", "W2");
  p.cfg = exponents_of(c);
  const AnalyticSpec q = at_line(c, "ip2", "q", [&] { return AnalyticSpec::parse(c.text("ip2", "q")); });
  std::vector<cplx> vals(p.grid.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = q.eval(p.grid.point(i), p.grid.dim);
  p.q = Field(p.grid, std::move(vals));
  return p;
}

IP2Options ip2_options_of(const ScenarioConfig& c) {
  IP2Options o;
  o.n_sources = c.integer("ip2", "n_sources");
  o.n_receivers = c.integer("ip2", "n_receivers");
  o.svd_cutoff = c.real("ip2", "svd_cutoff");
  o.runge_lambda = c.real("ip2", "runge_lambda");
  o.eta = c.real("ip2", "eta");
  o.mask_level = c.real("ip2", "mask_level");
  return o;
}

// ---------------------------------------------------------------------------

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw PreconditionError("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << fmt(r[i]);
    f << '\n';
  }
}

std::vector<std::vector<double>> read_csv(const std::string& path, std::vector<std::string>* header) {
  std::ifstream f(path);
  if (!f) throw PreconditionError("cannot open " + path);
  std::string line;
  int n = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    ++n;
    std::stringstream ss(line);
    std::string cell;
    if (n == 1) {
      if (header)
        while (std::getline(ss, cell, ',')) header->push_back(trim(cell));
      continue;
    }
    if (trim(line).empty()) continue;
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) {
      Lexer lx{cell, 0, n};
      r.push_back(lx.number());
      if (!lx.done()) lx.fail("malformed number in CSV");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_dn_csv(const std::string& path, const Eigen::MatrixXcd& D) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < D.rows(); ++i)
    for (Eigen::Index j = 0; j < D.cols(); ++j)
      rows.push_back({double(i), double(j), D(i, j).real(), D(i, j).imag()});
  write_csv(path, {"i", "j", "re", "im"}, rows);
}

Eigen::MatrixXcd read_dn_csv(const std::string& path) {
  const auto rows = read_csv(path);
  Eigen::Index I = 0, J = 0;
  for (const auto& r : rows) {
    if (r.size() != 4) throw ParseError("DN rows need i, j, re, im", 0);
    I = std::max<Eigen::Index>(I, Eigen::Index(r[0]) + 1);
    J = std::max<Eigen::Index>(J, Eigen::Index(r[1]) + 1);
  }
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(I, J);
  for (const auto& r : rows) D(Eigen::Index(r[0]), Eigen::Index(r[1])) = cplx(r[2], r[3]);
  return D;
}

}  // namespace fraclab
