#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "multmean/heckeforms.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "multmean_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(std::vector<std::string> args) { return multmean::cli::run(args); }

}  // namespace

TEST_CASE("sieve writes a JSON report") {
  const auto out = scratch("sieve.json");
  REQUIRE(run({"sieve", "--spec", "mobius", "--limit", "100", "--out", out.string()}) == 0);
  const auto doc = json::parse(slurp(out));
  CHECK(doc["tool"] == "multmean");
  CHECK(doc["subcommand"] == "sieve");
  CHECK(doc["command"] == "multmean sieve --spec mobius --limit 100 --out " + out.string());
  CHECK(doc["passed"] == true);
  CHECK(doc["result"]["mean_sum"] == 1.0);
  CHECK(doc["result"]["head"][5] == 1.0);
  CHECK(doc["result"]["prime_count"] == 25);
  CHECK_FALSE(fs::exists(out.string() + ".tmp"));
}

TEST_CASE("reports are byte-identical across runs") {
  const auto a = scratch("det_a.json");
  const auto b = scratch("det_b.json");
  for (const auto& p : {a, b}) {
    REQUIRE(run({"lambda-min", "--spec", "random", "--seed", "7", "--limit", "3000", "--T", "2", "--out", p.string()}) ==
            0);
  }
  auto strip = [](std::string s) {
    const auto doc = json::parse(s);
    return doc["result"].dump();
  };
  CHECK(strip(slurp(a)) == strip(slurp(b)));
  // Same --out twice: identical bytes.
  REQUIRE(run({"lambda-min", "--spec", "random", "--seed", "7", "--limit", "3000", "--T", "2", "--out", a.string()}) == 0);
  const auto first = slurp(a);
  REQUIRE(run({"lambda-min", "--spec", "random", "--seed", "7", "--limit", "3000", "--T", "2", "--out", a.string()}) == 0);
  CHECK(slurp(a) == first);

  // A different seed changes the function.
  REQUIRE(run({"lambda-min", "--spec", "random", "--seed", "8", "--limit", "3000", "--T", "2", "--out", b.string()}) == 0);
  CHECK(strip(slurp(b)) != strip(first));
}

TEST_CASE("an existing report is replaced whole") {
  const auto out = scratch("replace.json");
  { std::ofstream(out) << std::string(100000, 'x'); }
  REQUIRE(run({"sieve", "--spec", "one", "--limit", "10", "--out", out.string()}) == 0);
  CHECK_NOTHROW(json::parse(slurp(out)));
}

TEST_CASE("exit codes") {
  CHECK(run({"sieve", "--bogus"}) == 1);
  CHECK(run({}) == 1);
  CHECK(run({"sieve", "--spec", "nonesuch", "--limit", "10"}) == 1);
  CHECK(run({"density", "--limit", "100", "--checkpoints", "1000", "--out", scratch("x.json").string()}) == 1);
  CHECK(run({"example3", "--c", "1.5", "--limit", "10000", "--out", scratch("x.json").string()}) == 1);
  CHECK(run({"sign-eq", "--coeff-file", "/nonexistent.csv", "--checkpoints", "100"}) == 1);

  // Coefficients that are never negative fail the sign assertion.
  const auto coeffs = scratch("divisor.csv");
  const auto d = multmean::hecke_extend(std::function<multmean::BigInt(std::uint64_t)>([](std::uint64_t) {
                                          return multmean::BigInt(2);
                                        }),
                                        multmean::Weight::normalized(), 1000);
  multmean::save_coeff_table(d, coeffs);
  const auto out = scratch("sign_fail.json");
  CHECK(run({"sign-eq", "--coeff-file", coeffs.string(), "--weight", "normalized", "--checkpoints", "100,1000", "--out",
             out.string()}) == 2);
  const auto doc = json::parse(slurp(out));
  CHECK(doc["passed"] == false);
  CHECK(doc["result"]["generic"] == false);

  CHECK(run({"sign-eq", "--coeff-file", coeffs.string(), "--weight", "12", "--checkpoints", "100"}) == 1);
}

TEST_CASE("tau-gen writes the coefficient file") {
  const auto csv = scratch("tau.csv");
  const auto out = scratch("tau.json");
  REQUIRE(run({"tau-gen", "--limit", "500", "--csv", csv.string(), "--out", out.string()}) == 0);
  const auto doc = json::parse(slurp(out));
  CHECK(doc["result"]["sample"]["2"] == "-24");
  CHECK(doc["result"]["csv_sha256"] == multmean::sha256_file(csv));
  const auto back = multmean::load_coeff_table(csv, multmean::Weight::integral(12));
  CHECK(back == multmean::eta24_expand(500));

  // The file feeds back in through --coeff-file.
  const auto sign = scratch("sign.json");
  CHECK(run({"sign-eq", "--coeff-file", csv.string(), "--checkpoints", "100,500", "--out", sign.string()}) == 0);
}

TEST_CASE("density and sweep subcommands") {
  const auto out = scratch("density.json");
  REQUIRE(run({"density", "--spec", "cm4", "--modulus", "4", "--checkpoints", "1000,10000", "--out", out.string()}) == 0);
  const auto doc = json::parse(slurp(out));
  const auto& cps = doc["result"]["checkpoints"];
  REQUIRE(cps.size() == 2);
  CHECK(cps[1]["classes"][0]["gamma_hat"] == 1.0);

  const auto csv = scratch("sweep.csv");
  REQUIRE(run({"d-sweep", "--limit", "5000", "--moduli", "2..6,10", "--csv", csv.string(), "--out",
               scratch("sweep.json").string()}) == 0);
  std::ifstream in(csv);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "D,max_error,envelope,small_classes,min_class_terms");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  CHECK(run({"d-sweep", "--limit", "5000", "--moduli", "6..2"}) == 1);
}
