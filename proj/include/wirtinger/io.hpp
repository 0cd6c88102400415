#pragma once

/**
 * @file io.hpp
 * @brief JSON and CSV forms of weights, grid functions, reports and
 *        minimization results.
 *
 * Output is written by hand so that every real carries 17 significant digits
 * (enough to round-trip a double). Weight files are parsed with nlohmann/json.
 * Non-finite reals are written as the strings "inf", "-inf" and "nan".
 */

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "wirtinger/error.hpp"
#include "wirtinger/exponents.hpp"
#include "wirtinger/inequality.hpp"
#include "wirtinger/rayleigh.hpp"
#include "wirtinger/weights.hpp"

namespace wirt::io {

/// Significant digits for machine-readable output.
inline constexpr int kDataDigits = 17;
/// Significant digits for human-readable output.
inline constexpr int kTextDigits = 12;

inline std::string format_real(double v, int digits = kDataDigits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Parses a real written as a decimal ("0.375"), a fraction ("3/8"), or "inf"/"nan".
inline double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    return parse_real(text.substr(0, slash)) / parse_real(text.substr(slash + 1));
  }
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw DomainError("not a real number: '" + text + "'");
  }
  return v;
}

/// Flat JSON object with insertion-ordered scalar or real-array fields.
class JsonRecord {
 public:
  JsonRecord& add(const std::string& key, double v) {
    std::string s = format_real(v);
    if (!std::isfinite(v)) s = "\"" + s + "\"";
    fields_.emplace_back(key, std::move(s));
    return *this;
  }
  JsonRecord& add(const std::string& key, bool v) {
    fields_.emplace_back(key, v ? "true" : "false");
    return *this;
  }
  JsonRecord& add(const std::string& key, int v) { return add_raw(key, std::to_string(v)); }
  JsonRecord& add(const std::string& key, std::int64_t v) { return add_raw(key, std::to_string(v)); }
  JsonRecord& add(const std::string& key, std::uint64_t v) { return add_raw(key, std::to_string(v)); }
  JsonRecord& add(const std::string& key, std::size_t v, int) { return add_raw(key, std::to_string(v)); }
  JsonRecord& add(const std::string& key, const std::string& v) {
    return add_raw(key, nlohmann::json(v).dump());
  }
  JsonRecord& add(const std::string& key, const char* v) { return add(key, std::string(v)); }
  JsonRecord& add(const std::string& key, const std::vector<double>& v, bool as_strings = false) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      const std::string r = format_real(v[i]);
      s += as_strings || !std::isfinite(v[i]) ? "\"" + r + "\"" : r;
    }
    return add_raw(key, s + "]");
  }
  JsonRecord& add_raw(const std::string& key, std::string json_value) {
    fields_.emplace_back(key, std::move(json_value));
    return *this;
  }

  std::string str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (i) s += ", ";
      s += nlohmann::json(fields_[i].first).dump() + ": " + fields_[i].second;
    }
    return s + "}";
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

// ---------------------------------------------------------------------------
// Weights

/// {"T", "kind", ...}; piecewise breakpoints are written as decimal strings.
inline std::string weight_to_json(const Weight& w) {
  JsonRecord r;
  r.add("T", w.period()).add("kind", to_string(w.kind()));
  switch (w.kind()) {
    case WeightKind::Uniform:
      r.add("values", std::vector<double>{w.height()});
      break;
    case WeightKind::Piecewise:
      r.add("breakpoints", std::vector<double>(w.breakpoints().begin(), w.breakpoints().end()), true);
      r.add("values", std::vector<double>(w.values().begin(), w.values().end()));
      break;
    case WeightKind::FatCantor:
      r.add("level", w.level()).add("height", w.height());
      break;
  }
  return r.str();
}

namespace detail {

inline double json_real(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_real(j.get<std::string>());
  throw DomainError(std::string("weight JSON: field '") + what + "' must be a number or string");
}

inline std::vector<double> json_reals(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw DomainError(std::string("weight JSON: field '") + what + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(json_real(x, what));
  return out;
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DomainError(std::string("weight JSON: missing field '") + key + "'");
  return j.at(key);
}

}  // namespace detail

inline Weight weight_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("weight JSON: expected an object");
  const double period = detail::json_real(detail::require(j, "T"), "T");
  const std::string kind = detail::require(j, "kind").get<std::string>();
  if (kind == "uniform") {
    double level = 1.0;
    if (j.contains("values")) {
      const auto v = detail::json_reals(j.at("values"), "values");
      if (v.size() != 1) throw DomainError("weight JSON: uniform weight takes exactly one value");
      level = v.front();
    } else if (j.contains("height")) {
      level = detail::json_real(j.at("height"), "height");
    }
    return Weight::uniform(period, level);
  }
  if (kind == "piecewise") {
    auto bps = detail::json_reals(detail::require(j, "breakpoints"), "breakpoints");
    auto vals = detail::json_reals(detail::require(j, "values"), "values");
    if (!bps.empty() && bps.back() != period) {
      throw DomainError("weight JSON: last breakpoint must equal T");
    }
    return Weight::piecewise(std::move(bps), std::move(vals));
  }
  if (kind == "fat_cantor") {
    const auto& lv = detail::require(j, "level");
    if (!lv.is_number_integer()) throw DomainError("weight JSON: 'level' must be an integer");
    const double height = j.contains("height") ? detail::json_real(j.at("height"), "height") : 1.0;
    return make_fat_cantor(period, lv.get<int>(), height);
  }
  throw DomainError("weight JSON: unknown kind '" + kind + "'");
}

inline Weight weight_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("weight JSON: ") + e.what());
  }
  try {
    return weight_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("weight JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Grid functions

/// CSV with header `x,u`, one row per node, the closing node x = T omitted.
inline void write_function_csv(std::ostream& os, const PeriodicFunction& u) {
  os << "x,u\n";
  for (std::size_t i = 0; i < u.size(); ++i) os << format_real(u.node(i)) << ',' << format_real(u[i]) << '\n';
}

/**
 * Reads a function CSV onto a grid of the given period. The abscissae must
 * start at 0 and be uniform with spacing period/N to relative 1e-9.
 */
inline PeriodicFunction read_function_csv(std::istream& is, double period) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("function CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,u") throw DomainError("function CSV: header must be 'x,u', got '" + line + "'");
  std::vector<double> xs, us;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("function CSV: malformed row '" + line + "'");
    xs.push_back(parse_real(line.substr(0, comma)));
    us.push_back(parse_real(line.substr(comma + 1)));
  }
  if (xs.size() < kMinNodes) throw DomainError("function CSV: need at least 8 rows");
  const double h = period / static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double expected = PeriodicFunction::node(period, xs.size(), i);
    if (std::abs(xs[i] - expected) > 1e-9 * period) {
      throw DomainError("function CSV: row " + std::to_string(i) + " has x=" + format_real(xs[i]) +
                        ", expected a uniform grid of spacing " + format_real(h) + " starting at 0");
    }
  }
  for (double u : us) {
    if (!std::isfinite(u)) throw DomainError("function CSV: values must be finite");
  }
  return PeriodicFunction(period, std::move(us));
}

// ---------------------------------------------------------------------------
// Reports

inline std::string report_to_json(const InequalityReport& r, const std::string& warning = {}) {
  JsonRecord j;
  j.add("lhs", r.lhs)
      .add("rhs_seminorm", r.rhs_seminorm)
      .add("sharp_factor", r.sharp_factor)
      .add("ratio", r.ratio)
      .add("constraint_residual", r.constraint_residual)
      .add("satisfied", r.satisfied)
      .add("admissible", r.admissible);
  if (!warning.empty()) j.add("warning", warning);
  return j.str();
}

inline constexpr const char* kReportCsvHeader = "p,q,T,mass,lhs,rhs,sharp_factor,ratio,constraint,satisfied";

inline std::string report_csv_row(const InequalityReport& r, const ExponentPair& e, const Weight& w) {
  std::ostringstream os;
  os << format_real(e.p()) << ',' << format_real(e.q()) << ',' << format_real(w.period()) << ','
     << format_real(w.total_mass()) << ',' << format_real(r.lhs) << ',' << format_real(r.rhs_seminorm) << ','
     << format_real(r.sharp_factor) << ',' << format_real(r.ratio) << ','
     << format_real(r.constraint_residual) << ',' << (r.satisfied ? "true" : "false");
  return os.str();
}

/// Parsed form of a report row (only used to read back files this module wrote).
struct ReportRow {
  double p, q, period, mass, lhs, rhs, sharp_factor, ratio, constraint;
  bool satisfied;
};

inline ReportRow parse_report_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (cells.size() != 10) throw DomainError("report CSV: expected 10 columns");
  ReportRow r{};
  double* fields[] = {&r.p, &r.q, &r.period, &r.mass, &r.lhs, &r.rhs, &r.sharp_factor, &r.ratio, &r.constraint};
  for (std::size_t i = 0; i < 9; ++i) *fields[i] = parse_real(cells[i]);
  if (cells[9] != "true" && cells[9] != "false") throw DomainError("report CSV: bad 'satisfied' cell");
  r.satisfied = cells[9] == "true";
  return r;
}

// ---------------------------------------------------------------------------
// Minimization results

inline std::string result_to_json(const MinimizationResult& r, const ExponentPair& e, std::uint64_t seed) {
  JsonRecord j;
  j.add("quotient", r.quotient)
      .add("converged", r.converged)
      .add("iterations", r.iterations)
      .add("N", r.argmin.size(), 0)
      .add("p", e.p())
      .add("q", e.q())
      .add("seed", seed);
  return j.str();
}

}  // namespace wirt::io
