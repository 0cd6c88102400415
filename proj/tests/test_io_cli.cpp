#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "cli_app.hpp"
#include "ensembles.hpp"
#include "json.hpp"
#include "wirtinger/io.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::EndsWith;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using wirt::Weight;

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wirtinger");
  std::ostringstream out, err;
  const int code = wirt::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "wirtinger_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("format_real and parse_real round trip", "[io]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(wirt::io::parse_real(wirt::io::format_real(v)) == v);
  }
  CHECK(wirt::io::format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(wirt::io::format_real(std::nan("")) == "nan");
  CHECK(wirt::io::parse_real("3/8") == 0.375);
  CHECK_THROWS_AS(wirt::io::parse_real("1.5x"), wirt::DomainError);
  CHECK_THROWS_AS(wirt::io::parse_real(""), wirt::DomainError);
}

TEST_CASE("weight JSON round trip", "[io]") {
  std::mt19937_64 rng(8);
  const Weight ws[] = {Weight::uniform(2.5, 0.75), ensembles::random_piecewise(rng, std::numbers::pi, 7, 0.3),
                       wirt::make_fat_cantor(1.0, 5, 2.0)};
  for (const Weight& w : ws) {
    const Weight back = wirt::io::weight_from_json(wirt::io::weight_to_json(w));
    CHECK(back.kind() == w.kind());
    CHECK(back.period() == w.period());
    CHECK(back.total_mass() == w.total_mass());
    REQUIRE(back.cell_count() == w.cell_count());
    for (std::size_t j = 0; j <= w.cell_count(); ++j) CHECK(back.breakpoints()[j] == w.breakpoints()[j]);
    for (std::size_t j = 0; j < w.cell_count(); ++j) CHECK(back.values()[j] == w.values()[j]);
  }
}

TEST_CASE("weight JSON: schema errors", "[io]") {
  using wirt::io::weight_from_json;
  CHECK_THROWS_AS(weight_from_json(std::string("{")), wirt::DomainError);
  CHECK_THROWS_AS(weight_from_json(std::string(R"({"kind": "uniform"})")), wirt::DomainError);
  CHECK_THROWS_AS(weight_from_json(std::string(R"({"T": 1, "kind": "wavy"})")), wirt::DomainError);
  CHECK_THROWS_AS(weight_from_json(std::string(R"({"T": 1, "kind": "piecewise", "breakpoints": [0, 0.5], "values": [1]})")),
                  wirt::DomainError);
  CHECK_THROWS_AS(weight_from_json(std::string(R"({"T": 1, "kind": "fat_cantor", "level": 0})")), wirt::DomainError);
  const Weight w = weight_from_json(std::string(R"({"T": 1, "kind": "piecewise", "breakpoints": [0, "3/8", "5/8", 1], "values": [1, 0, 1]})"));
  CHECK(w.total_mass() == 0.75);
}

TEST_CASE("function CSV round trip and validation", "[io]") {
  const auto u = wirt::PeriodicFunction::sample(3.0, 100, [](double x) { return std::exp(std::sin(x)); });
  std::stringstream ss;
  wirt::io::write_function_csv(ss, u);
  const auto text = ss.str();
  CHECK(lines(text).size() == 101);
  CHECK(lines(text).front() == "x,u");
  const auto back = wirt::io::read_function_csv(ss, 3.0);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(back[i] == u[i]);

  std::stringstream bad_header("t,u\n0,1\n");
  CHECK_THROWS_AS(wirt::io::read_function_csv(bad_header, 1.0), wirt::DomainError);
  std::stringstream wrong_period(text);
  CHECK_THROWS_AS(wirt::io::read_function_csv(wrong_period, 2.0), wirt::DomainError);
}

TEST_CASE("report serialization", "[io]") {
  wirt::InequalityReport r{1.0, std::numeric_limits<double>::infinity(), 0.5, 0.0, 1e-17, true, true};
  const auto j = nlohmann::json::parse(wirt::io::report_to_json(r));
  CHECK(j.at("rhs_seminorm") == "inf");
  CHECK(j.at("satisfied") == true);
  CHECK(j.at("lhs").get<double>() == 1.0);
  CHECK_FALSE(j.contains("warning"));
  r.ratio = std::nan("");
  CHECK(nlohmann::json::parse(wirt::io::report_to_json(r, "w")).at("ratio") == "nan");

  const Weight w = Weight::uniform(2.0, 1.0);
  const auto row = wirt::io::report_csv_row(r, {3, 1.5}, w);
  const auto back = wirt::io::parse_report_csv_row(row);
  CHECK(back.p == 3.0);
  CHECK(back.q == 1.5);
  CHECK(std::isinf(back.rhs));
  CHECK(back.satisfied);
}

TEST_CASE("cli constant", "[cli]") {
  auto r = cli({"constant", "--p", "2", "--q", "2"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "p,q,C,inv_C,pi_qpstar,T,mass,sharp_factor");
  CHECK_THAT(rows[1], ContainsSubstring("0.31830988618379"));

  r = cli({"constant", "--p", "2", "--q", "2", "--T", "6.283185", "--uniform", "1", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK_THAT(j.at("sharp_factor").get<double>(), WithinAbs(1.0, 1e-6));
  CHECK(j.at("C").get<double>() == wirt::sharp_constant({2, 2}));

  r = cli({"constant", "--p", "1", "--q", "2"});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("1 < p"));
  CHECK(cli({"constant", "--p", "2"}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli table", "[cli]") {
  auto r = cli({"table", "--p-list", "2", "--q-list", "2"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "p,q,C,inv_C,pi_qpstar");

  r = cli({"table", "--p-list", "2,3", "--q-list", "2,3"});
  REQUIRE(r.code == 0);
  rows = lines(r.out);
  REQUIRE(rows.size() == 5);
  const double ps[] = {2, 2, 3, 3};
  const double qs[] = {2, 3, 2, 3};
  for (int i = 0; i < 4; ++i) {
    std::stringstream ss(rows[i + 1]);
    std::string p, q, c;
    std::getline(ss, p, ',');
    std::getline(ss, q, ',');
    std::getline(ss, c, ',');
    CHECK(std::stod(p) == ps[i]);
    CHECK(std::stod(q) == qs[i]);
    CHECK(wirt::io::parse_real(c) == wirt::sharp_constant({ps[i], qs[i]}));
  }
  CHECK(cli({"table", "--p-list", "", "--q-list", "2"}).code == 2);
  CHECK(cli({"table", "--p-list", "2,,3", "--q-list", "2"}).code == 2);
  CHECK(cli({"table", "--p-list", "0.5", "--q-list", "2"}).code == 2);
}

TEST_CASE("cli eval-sin", "[cli]") {
  const auto r = cli({"eval-sin", "--p", "2", "--q", "2", "--t", "0,0.5235987755982988"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "t,sin_pq,sin_pq_derivative");
  CHECK(rows[1] == "0,0,1");
}

TEST_CASE("cli extremal then verify", "[cli]") {
  const auto weight_file = scratch("cantor.json");
  write_text(weight_file, wirt::io::weight_to_json(wirt::make_fat_cantor(2.0, 3, 1.0)));
  const auto fn = scratch("extremal.csv");
  auto r = cli({"extremal", "--p", "3", "--q", "1.5", "--weight", weight_file.string(), "--nodes", "8192",
                "--output", fn.string()});
  REQUIRE(r.code == 0);

  r = cli({"verify", "--p", "3", "--q", "1.5", "--weight", weight_file.string(), "--function", fn.string(),
           "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK_THAT(j.at("ratio").get<double>(), WithinAbs(1.0, 1e-6));
  CHECK(j.at("admissible") == true);

  // bit-exact against the library
  const Weight w = wirt::make_fat_cantor(2.0, 3, 1.0);
  const auto u = wirt::extremal(w, {3, 1.5}, {}, 8192);
  const auto lib = wirt::verify(u, w, {3, 1.5}, wirt::kSlackFiniteDifference);
  CHECK(j.at("lhs").get<double>() == lib.lhs);
  CHECK(j.at("rhs_seminorm").get<double>() == lib.rhs_seminorm);

  CHECK(cli({"verify", "--p", "3", "--q", "1.5", "--weight", weight_file.string(), "--function",
             scratch("missing.csv").string()})
            .code == 2);
}

TEST_CASE("cli verify: projection, inadmissible input, violation", "[cli]") {
  const auto fn = scratch("raw.csv");
  std::mt19937_64 rng(5);
  const Weight w = Weight::uniform(2.0, 1.0);
  {
    std::ofstream os(fn);
    wirt::io::write_function_csv(os, ensembles::random_function(rng, w, 2048, 6).shifted(-0.8));
  }
  auto r = cli({"verify", "--p", "2.5", "--q", "3", "--function", fn.string(), "--project"});
  CHECK(r.code == 0);
  CHECK_THAT(lines(r.out).at(1), EndsWith(",true"));

  r = cli({"verify", "--p", "2.5", "--q", "3", "--function", fn.string(), "--format", "json"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("admissible") == false);
  CHECK(j.contains("warning"));

  // a sharp extremal with a negative slack must be reported as a violation
  const auto ex = scratch("ex.csv");
  {
    std::ofstream os(ex);
    wirt::io::write_function_csv(os, wirt::extremal(w, {2, 2}, {}, 4096));
  }
  r = cli({"verify", "--p", "2", "--q", "2", "--function", ex.string(), "--slack", "-1e-3"});
  CHECK(r.code == 3);
}

TEST_CASE("cli minimize: reproducible files", "[cli]") {
  const auto a1 = scratch("argmin1.csv");
  const auto a2 = scratch("argmin2.csv");
  const std::vector<std::string> base{"minimize", "--p", "3", "--q", "2", "--nodes", "256", "--seed", "11",
                                      "--restarts", "1"};
  auto args1 = base;
  args1.insert(args1.end(), {"--argmin", a1.string(), "--format", "json"});
  auto args2 = base;
  args2.insert(args2.end(), {"--argmin", a2.string(), "--format", "json"});
  const auto r1 = cli(args1);
  const auto r2 = cli(args2);
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  std::ifstream f1(a1), f2(a2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  const auto j = nlohmann::json::parse(r1.out);
  CHECK_THAT(j.at("quotient").get<double>() * wirt::sharp_constant({3, 2}), WithinAbs(1.0, 5e-3));
  CHECK(j.at("N") == 256);
}

TEST_CASE("cli cantor-demo", "[cli]") {
  auto r = cli({"cantor-demo", "--level", "1", "--p", "2", "--q", "2", "--T", "1", "--format", "json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("mass").get<double>() == 0.75);
  CHECK(j.at("max_flat_variation").get<double>() == 0.0);
  CHECK_THAT(j.at("ratio").get<double>(), WithinAbs(1.0, 1e-5));

  for (int level : {2, 4, 6}) {
    r = cli({"cantor-demo", "--level", std::to_string(level), "--p", "3", "--q", "1.5", "--T", "1", "--format",
             "json"});
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out);
    CHECK(j.at("mass").get<double>() == 0.5 + std::ldexp(1.0, -(level + 1)));
    CHECK(j.at("max_flat_variation").get<double>() == 0.0);
    CHECK_THAT(j.at("ratio").get<double>(), WithinAbs(1.0, 1e-5));
  }

  r = cli({"cantor-demo", "--level", "6", "--p", "2", "--q", "2", "--T", "1"});
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("# mass 0.5078125"));
  CHECK_THAT(r.out, ContainsSubstring("\nx,Y,u\n"));

  CHECK(cli({"cantor-demo", "--level", "0", "--p", "2", "--q", "2"}).code == 2);
  CHECK(cli({"cantor-demo", "--level", "13", "--p", "2", "--q", "2"}).code == 2);
}

TEST_CASE("cli output directory from the environment", "[cli]") {
  const fs::path dir = scratch("outdir");
  fs::remove_all(dir);
  ::setenv("WIRTINGER_OUTPUT_DIR", dir.string().c_str(), 1);
  const auto r = cli({"table", "--p-list", "2", "--q-list", "2", "--output", "t.csv"});
  ::unsetenv("WIRTINGER_OUTPUT_DIR");
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(fs::exists(dir / "t.csv"));
}
