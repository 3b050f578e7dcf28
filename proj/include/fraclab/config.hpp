#pragma once

#include <map>
#include <string>
#include <vector>

#include "fraclab/calderon.hpp"
#include "fraclab/exponents.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/heat.hpp"

namespace fraclab {

/**
 * Sectioned key-value scenario document:
 *
 *   # comment
 *   [grid]
 *   dim = 2
 *   half_width = 12.0
 *   [fields]
 *   u = ["shell([0, 0], 3.5, 0.3)"]
 *
 * Values are decimal literals, true/false, double-quoted strings or
 * one-line lists of either. Sections and keys come from a fixed schema;
 * anything else is a ParseError carrying the line number.
 */
class ScenarioConfig {
 public:
  enum class Type { Int, Real, Bool, String, RealList, StringList };

  struct Value {
    Type type = Type::Real;
    double num = 0.0;
    bool flag = false;
    std::string text;
    std::vector<double> nums;
    std::vector<std::string> texts;
    int line = 0;

    bool operator==(const Value& o) const;
  };

  static ScenarioConfig parse(const std::string& text);
  static ScenarioConfig load(const std::string& path);
  /// Canonical form: schema order, 17 significant digits.
  std::string serialize() const;

  bool has(const std::string& section, const std::string& key) const;
  /// Line of the key in the parsed text, 0 when absent or set programmatically.
  int line(const std::string& section, const std::string& key) const;

  // Typed access; absent keys fall back to the schema default, or throw
  // ParseError when the key is required.
  int integer(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key) const;
  bool boolean(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::vector<double> reals(const std::string& section, const std::string& key) const;
  std::vector<std::string> texts(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, Value v);
  void set_real(const std::string& section, const std::string& key, double x);

  bool operator==(const ScenarioConfig& o) const { return data_ == o.data_; }

 private:
  const Value& get(const std::string& section, const std::string& key, Type t) const;
  std::map<std::string, std::map<std::string, Value>> data_;
};

/// "ball([c], r)" or "box([lo], [hi])".
Shape parse_shape(const std::string& text);
std::string shape_to_string(const Shape& s, int dim);

GridSpec grid_of(const ScenarioConfig& c);
ExponentConfig exponents_of(const ScenarioConfig& c);
RegionSpec region_of(const ScenarioConfig& c);
/// [fields].u sampled on the grid, in the order given.
std::vector<Field> fields_of(const ScenarioConfig& c, const GridSpec& g);
/// [mellin] log-time quadrature settings.
TimeQuadrature quadrature_of(const ScenarioConfig& c);
Point point_of(const std::vector<double>& v);
/// [ip2] geometry with the potential [ip2].q evaluated pointwise.
ExteriorProblem ip2_problem_of(const ScenarioConfig& c);
IP2Options ip2_options_of(const ScenarioConfig& c);

/// Header row plus numeric rows, every value printed with %.17g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
/// Reads a numeric CSV with a header row.
std::vector<std::vector<double>> read_csv(const std::string& path, std::vector<std::string>* header = nullptr);

/// DN export as rows (i, j, re, im).
void write_dn_csv(const std::string& path, const Eigen::MatrixXcd& D);
Eigen::MatrixXcd read_dn_csv(const std::string& path);

}  // namespace fraclab
