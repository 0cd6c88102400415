#pragma once

// Command-line front end. Each subcommand parses flags, calls one library
// routine and prints its result. Kept in a header so the tests can drive it
// in-process.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wirtinger/wirtinger.hpp"

namespace wirt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVerification = 3;

enum class Format { Csv, Json };

struct CliConfig {
  std::string command;
  double p = 2.0;
  double q = 2.0;
  double T = 2.0;
  std::optional<std::string> weight_path;
  double uniform_level = 1.0;
  std::size_t nodes = 4096;
  Format output_format = Format::Csv;
  std::optional<std::string> output_path;
  std::uint64_t seed = 0;
  std::optional<double> slack;

  // subcommand-specific
  std::string t_list;
  std::string p_list;
  std::string q_list;
  double alpha = 1.0;
  double delta = 0.0;
  std::string function_path;
  bool project = false;
  int restarts = 2;
  std::optional<std::string> argmin_path;
  int level = 1;
};

/// Relative paths go under $WIRTINGER_OUTPUT_DIR when it is set.
inline std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path out(path);
  if (out.is_relative()) {
    if (const char* dir = std::getenv("WIRTINGER_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
      out = std::filesystem::path(dir) / out;
    }
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through `emit` to --output if given, else to `out`.
template <typename Emit>
void write_output(const std::optional<std::string>& path, std::ostream& out, Emit emit) {
  if (!path) {
    emit(out);
    return;
  }
  const auto target = resolve_output(*path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream file(target, std::ios::binary);
  if (!file) throw DomainError("cannot write '" + target.string() + "'");
  emit(file);
  if (!file) throw DomainError("write to '" + target.string() + "' failed");
}

inline std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(std::remove_if(cell.begin(), cell.end(), [](unsigned char c) { return std::isspace(c); }),
               cell.end());
    if (cell.empty()) throw DomainError(std::string(what) + ": empty entry in list");
    out.push_back(io::parse_real(cell));
  }
  if (out.empty()) throw DomainError(std::string(what) + ": list is empty");
  return out;
}

inline Weight load_weight(const CliConfig& c) {
  if (c.weight_path) return io::weight_from_json(read_file(*c.weight_path));
  return Weight::uniform(c.T, c.uniform_level);
}

// ---------------------------------------------------------------------------

inline int cmd_constant(const CliConfig& c, std::ostream& out) {
  const ExponentPair e(c.p, c.q);
  const Weight w = load_weight(c);
  const double C = sharp_constant(e);
  const double pi_ext = pi_pq(e.extremal_pair());
  const double K = sharp_factor(w, e);
  write_output(c.output_path, out, [&](std::ostream& os) {
    if (c.output_format == Format::Json) {
      io::JsonRecord r;
      r.add("p", e.p()).add("q", e.q()).add("C", C).add("inv_C", 1.0 / C).add("pi_qpstar", pi_ext);
      r.add("T", w.period()).add("mass", w.total_mass()).add("sharp_factor", K);
      os << r.str() << '\n';
    } else {
      os << "p,q,C,inv_C,pi_qpstar,T,mass,sharp_factor\n";
      os << io::format_real(e.p()) << ',' << io::format_real(e.q()) << ',' << io::format_real(C) << ','
         << io::format_real(1.0 / C) << ',' << io::format_real(pi_ext) << ',' << io::format_real(w.period())
         << ',' << io::format_real(w.total_mass()) << ',' << io::format_real(K) << '\n';
    }
  });
  return kExitOk;
}

inline int cmd_eval_sin(const CliConfig& c, std::ostream& out) {
  const ExponentPair e(c.p, c.q);
  const auto ts = parse_list(c.t_list, "--t");
  const GTrigContext ctx(e);
  write_output(c.output_path, out, [&](std::ostream& os) {
    if (c.output_format == Format::Json) {
      os << "[";
      for (std::size_t i = 0; i < ts.size(); ++i) {
        io::JsonRecord r;
        r.add("t", ts[i]).add("sin_pq", ctx.sin(ts[i])).add("sin_pq_derivative", ctx.sin_derivative(ts[i]));
        os << (i ? ",\n " : "") << r.str();
      }
      os << "]\n";
    } else {
      os << "t,sin_pq,sin_pq_derivative\n";
      for (double t : ts) {
        os << io::format_real(t) << ',' << io::format_real(ctx.sin(t)) << ','
           << io::format_real(ctx.sin_derivative(t)) << '\n';
      }
    }
  });
  return kExitOk;
}

inline int cmd_table(const CliConfig& c, std::ostream& out) {
  const auto ps = parse_list(c.p_list, "--p-list");
  const auto qs = parse_list(c.q_list, "--q-list");
  std::vector<ExponentPair> pairs;
  for (double p : ps) {
    for (double q : qs) pairs.emplace_back(p, q);
  }
  write_output(c.output_path, out, [&](std::ostream& os) {
    if (c.output_format == Format::Json) os << "[";
    else os << "p,q,C,inv_C,pi_qpstar\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& e = pairs[i];
      const double C = sharp_constant(e);
      const double pi_ext = pi_pq(e.extremal_pair());
      if (c.output_format == Format::Json) {
        io::JsonRecord r;
        r.add("p", e.p()).add("q", e.q()).add("C", C).add("inv_C", 1.0 / C).add("pi_qpstar", pi_ext);
        os << (i ? ",\n " : "") << r.str();
      } else {
        os << io::format_real(e.p()) << ',' << io::format_real(e.q()) << ',' << io::format_real(C) << ','
           << io::format_real(1.0 / C) << ',' << io::format_real(pi_ext) << '\n';
      }
    }
    if (c.output_format == Format::Json) os << "]\n";
  });
  return kExitOk;
}

inline void emit_function(std::ostream& os, const PeriodicFunction& u, Format f) {
  if (f == Format::Csv) {
    io::write_function_csv(os, u);
    return;
  }
  std::vector<double> xs(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) xs[i] = u.node(i);
  io::JsonRecord r;
  r.add("T", u.period()).add("x", xs).add("u", std::vector<double>(u.values().begin(), u.values().end()));
  os << r.str() << '\n';
}

inline int cmd_extremal(const CliConfig& c, std::ostream& out) {
  const ExponentPair e(c.p, c.q);
  const Weight w = load_weight(c);
  const PeriodicFunction u = extremal(w, e, {c.alpha, c.delta}, c.nodes);
  write_output(c.output_path, out, [&](std::ostream& os) { emit_function(os, u, c.output_format); });
  return kExitOk;
}

inline int cmd_verify(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const ExponentPair e(c.p, c.q);
  const Weight w = load_weight(c);
  std::ifstream in(c.function_path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + c.function_path + "'");
  PeriodicFunction u = io::read_function_csv(in, w.period());
  if (c.project) u = project_constraint(u, w, e.q());
  const InequalityReport r = verify(u, w, e, c.slack.value_or(kSlackFiniteDifference));

  std::string warning;
  if (!r.admissible) warning = "constraint not satisfied; the inequality does not apply (rerun with --project)";
  write_output(c.output_path, out, [&](std::ostream& os) {
    if (c.output_format == Format::Json) {
      os << io::report_to_json(r, warning) << '\n';
    } else {
      os << io::kReportCsvHeader << '\n' << io::report_csv_row(r, e, w) << '\n';
    }
  });
  if (!warning.empty()) {
    err << "warning: " << warning << '\n';
    return kExitOk;
  }
  return r.satisfied ? kExitOk : kExitVerification;
}

inline int cmd_minimize(const CliConfig& c, std::ostream& out) {
  const ExponentPair e(c.p, c.q);
  const Weight w = load_weight(c);
  MinimizerConfig cfg;
  cfg.nodes = c.nodes;
  cfg.seed = c.seed;
  cfg.restarts = c.restarts;
  const MinimizationResult r = minimize_weighted(w, e, cfg);
  write_output(c.output_path, out, [&](std::ostream& os) {
    if (c.output_format == Format::Json) {
      os << io::result_to_json(r, e, c.seed) << '\n';
    } else {
      os << "quotient,converged,iterations,N,p,q,seed\n"
         << io::format_real(r.quotient) << ',' << (r.converged ? "true" : "false") << ',' << r.iterations
         << ',' << r.argmin.size() << ',' << io::format_real(e.p()) << ',' << io::format_real(e.q()) << ','
         << c.seed << '\n';
    }
  });
  if (c.argmin_path) {
    write_output(c.argmin_path, out, [&](std::ostream& os) { io::write_function_csv(os, r.argmin); });
  }
  return kExitOk;
}

/// Smallest grid aligned with every breakpoint of a level-n fat Cantor weight.
inline std::size_t cantor_grid(int level, std::size_t requested) {
  return std::max(requested, std::size_t{1} << (2 * level + 1));
}

inline int cmd_cantor_demo(const CliConfig& c, std::ostream& out) {
  if (c.level < 1 || c.level > 12) {
    throw DomainError("cantor-demo: level must lie in [1, 12], got " + std::to_string(c.level));
  }
  const ExponentPair e(c.p, c.q);
  const Weight w = make_fat_cantor(c.T, c.level, 1.0);
  const double closed_form = c.T * (0.5 + std::ldexp(1.0, -(c.level + 1)));
  const std::size_t n = cantor_grid(c.level, c.nodes);
  const PeriodicFunction u = extremal(w, e, {}, n);
  const PhaseMap map(w);
  const InequalityReport r = verify(u, w, e);

  // Largest spread of u over the grid nodes lying in a removed interval.
  double flat_variation = 0.0;
  std::size_t removed = 0;
  const auto bps = w.breakpoints();
  for (std::size_t j = 0; j < w.cell_count(); ++j) {
    if (w.values()[j] != 0.0) continue;
    ++removed;
    const auto first_at_or_after = [&](double x) {
      auto i = static_cast<std::size_t>(std::clamp(std::ceil(x / c.T * static_cast<double>(n)), 0.0,
                                                   static_cast<double>(n)));
      while (i > 0 && PeriodicFunction::node(c.T, n, i - 1) >= x) --i;
      while (i <= n && PeriodicFunction::node(c.T, n, i) < x) ++i;
      return i;
    };
    const std::size_t begin = first_at_or_after(bps[j]);
    std::size_t end = first_at_or_after(bps[j + 1]);
    if (end <= n && PeriodicFunction::node(c.T, n, end) == bps[j + 1]) ++end;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = u.wrapped(i);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi >= lo) flat_variation = std::max(flat_variation, hi - lo);
  }

  if (c.output_format == Format::Json) {
    io::JsonRecord j;
    j.add("level", c.level).add("T", c.T).add("mass", w.total_mass()).add("closed_form_mass", closed_form);
    j.add("removed_intervals", static_cast<std::int64_t>(removed)).add("max_flat_variation", flat_variation);
    j.add("N", n, 0).add("lhs", r.lhs).add("rhs_seminorm", r.rhs_seminorm).add("sharp_factor", r.sharp_factor);
    j.add("ratio", r.ratio);
    out << j.str() << '\n';
  } else {
    const auto txt = [](double v) { return io::format_real(v, io::kTextDigits); };
    out << "# fat Cantor weight, level " << c.level << " on [0, " << txt(c.T) << "]\n"
        << "# mass " << txt(w.total_mass()) << ", closed form T(1/2 + 2^-" << c.level + 1 << ") = "
        << txt(closed_form) << (w.total_mass() == closed_form ? " (exact)" : " (differs)") << '\n'
        << "# " << removed << " removed intervals; largest variation of the extremal on them: "
        << txt(flat_variation) << '\n'
        << "# extremal on " << n << " nodes: lhs " << txt(r.lhs) << ", K*rhs "
        << txt(r.sharp_factor * r.rhs_seminorm) << ", ratio " << txt(r.ratio) << '\n';
  }
  if (c.output_format == Format::Csv || c.output_path) {
    write_output(c.output_path, out, [&](std::ostream& os) {
      os << "x,Y,u\n";
      for (std::size_t i = 0; i < n; ++i) {
        os << io::format_real(u.node(i)) << ',' << io::format_real(map.normalized(u.node(i))) << ','
           << io::format_real(u[i]) << '\n';
      }
    });
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* sub, CliConfig& c, bool exponents = true, bool weight = true) {
  if (exponents) {
    sub->add_option("--p", c.p, "exponent of the derivative norm")->required();
    sub->add_option("--q", c.q, "exponent of the function norm")->required();
  }
  if (weight) {
    sub->add_option("--T", c.T, "period (default 2)");
    auto* wp = sub->add_option("--weight", c.weight_path, "weight JSON file");
    sub->add_option("--uniform", c.uniform_level, "constant weight level (default 1)")->excludes(wp);
  }
  sub->add_option("--nodes", c.nodes, "grid size (default 4096)");
  sub->add_option("--format", c.output_format, "csv or json")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"csv", Format::Csv}, {"json", Format::Json}},
                                          CLI::ignore_case));
  sub->add_option("--output", c.output_path, "output file");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--slack", c.slack, "relative tolerance of the verification");
}

/// Runs the CLI on argv-style arguments (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"Sharp weighted Wirtinger inequalities: constants, extremals and verification", "wirtinger"};
  app.require_subcommand(1);

  auto* constant = app.add_subcommand("constant", "sharp constant, half period and sharp factor");
  add_common(constant, c);
  auto* eval = app.add_subcommand("eval-sin", "evaluate sin_pq and its derivative");
  add_common(eval, c, true, false);
  eval->add_option("--t", c.t_list, "comma-separated arguments")->required();
  auto* table = app.add_subcommand("table", "sharp constants over a grid of exponents");
  add_common(table, c, false, false);
  table->add_option("--p-list", c.p_list, "comma-separated p values")->required();
  table->add_option("--q-list", c.q_list, "comma-separated q values")->required();
  auto* ext = app.add_subcommand("extremal", "sample the extremal on a grid");
  add_common(ext, c);
  ext->add_option("--alpha", c.alpha, "amplitude");
  ext->add_option("--delta", c.delta, "phase shift");
  auto* ver = app.add_subcommand("verify", "check the inequality for a function file");
  add_common(ver, c);
  ver->add_option("--function", c.function_path, "function CSV with header x,u")->required();
  ver->add_flag("--project", c.project, "shift the function onto the constraint first");
  auto* mini = app.add_subcommand("minimize", "minimize the Rayleigh quotient directly");
  add_common(mini, c);
  mini->add_option("--restarts", c.restarts, "random restarts (default 2)");
  mini->add_option("--argmin", c.argmin_path, "write the minimizer as function CSV");
  auto* cantor = app.add_subcommand("cantor-demo", "fat Cantor weight, its extremal and its mass");
  add_common(cantor, c, true, false);
  cantor->add_option("--T", c.T, "period (default 2)");
  cantor->add_option("--level", c.level, "construction depth, 1..12")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (constant->parsed()) return cmd_constant(c, out);
    if (eval->parsed()) return cmd_eval_sin(c, out);
    if (table->parsed()) return cmd_table(c, out);
    if (ext->parsed()) return cmd_extremal(c, out);
    if (ver->parsed()) return cmd_verify(c, out, err);
    if (mini->parsed()) return cmd_minimize(c, out);
    if (cantor->parsed()) return cmd_cantor_demo(c, out);
  } catch (const InternalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitVerification;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace wirt::cli
