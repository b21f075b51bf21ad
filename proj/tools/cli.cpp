#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "multmean/errors.hpp"
#include "multmean/heckeforms.hpp"
#include "report_json.hpp"

namespace multmean::cli {
namespace {

struct Options {
  double limit = 0;  // 0: the largest checkpoint (or 1e6)
  std::vector<double> checkpoints;
  std::uint64_t modulus = 5;
  std::string moduli = "2..50";
  double T = 1;
  double Y = 1.5;
  double grid_step = 0;
  int refine = 40;
  double c = 0.5;
  double beta = 1;
  std::string coeff_file;
  std::string weight = "12";
  std::string spec;
  std::string prime_values;
  std::optional<double> tau;
  std::string out;
  std::string csv;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct Assertion {
  std::string name;
  bool passed;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> checkpoints_of(const Options& o) {
  return o.checkpoints.empty() ? default_checkpoints() : o.checkpoints;
}

std::uint64_t limit_of(const Options& o) {
  if (o.limit > 0) return detail::floor_to_index(o.limit);
  const auto cps = checkpoints_of(o);
  return detail::floor_to_index(*std::max_element(cps.begin(), cps.end()));
}

Weight weight_of(const Options& o) {
  if (o.weight == "normalized") return Weight::normalized();
  try {
    std::size_t used = 0;
    const int k = std::stoi(o.weight, &used);
    if (used == o.weight.size()) return Weight::integral(k);
  } catch (const std::exception&) {
  }
  throw DomainError("--weight must be an integer or 'normalized'");
}

CoeffTable coefficients(const Options& o, std::uint64_t limit) {
  if (!o.coeff_file.empty()) {
    CoeffTable t = load_coeff_table(o.coeff_file, weight_of(o));
    if (t.limit() < limit) {
      throw DomainError("coefficient file covers n <= " + std::to_string(t.limit()) + ", need " + std::to_string(limit));
    }
    return t;
  }
  ExpansionOptions eo;
  eo.workers = o.workers;
  return eta24_expand(limit, eo);
}

std::map<std::uint64_t, double> read_prime_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::map<std::uint64_t, double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "p,value") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'p,value'", lineno);
    try {
      values[std::stoull(line.substr(0, comma))] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("malformed row '" + line + "'", lineno);
    }
  }
  return values;
}

/// Named multiplicative functions available to sieve, lambda-min, theorem2 and wirsing.
MultSpec<double> named_spec(const Options& o, std::uint64_t limit, const PrimeSet& primes) {
  const std::string& name = o.spec.empty() ? std::string("one") : o.spec;
  if (!o.prime_values.empty()) {
    auto values = std::make_shared<std::map<std::uint64_t, double>>(read_prime_values(o.prime_values));
    return {"file:" + o.prime_values,
            [values](std::uint64_t p) {
              auto it = values->find(p);
              return it == values->end() ? 0.0 : it->second;
            },
            ZeroBeyondFirstPower{}};
  }
  if (name == "one") return {"one", [](std::uint64_t) { return 1.0; }, CompletelyMultiplicative{}};
  if (name == "mobius") return {"mobius", [](std::uint64_t) { return -1.0; }, ZeroBeyondFirstPower{}};
  if (name == "liouville") return {"liouville", [](std::uint64_t) { return -1.0; }, CompletelyMultiplicative{}};
  // d(p^k) = k + 1 is the normalized Hecke recurrence with a_p = 2.
  if (name == "divisor") return {"divisor", [](std::uint64_t) { return 2.0; }, HeckeRecurrence::normalized()};
  if (name == "cm4") {
    return {"cm4", [](std::uint64_t p) { return p % 4 == 1 ? 1.0 : 0.0; }, CompletelyMultiplicative{}};
  }
  if (name == "random") {
    const std::uint64_t seed = o.seed;
    return {"random(seed=" + std::to_string(seed) + ")",
            [seed](std::uint64_t p) { return 2.0 * static_cast<double>(splitmix64(seed ^ (p * 0x2545f4914f6cdd1dULL)) >> 11) * 0x1.0p-53; },
            Exponential{}};
  }
  if (name == "example3") return build_example3(o.c, static_cast<double>(limit), primes).as_spec();
  throw DomainError("unknown --spec '" + name + "' (one, mobius, liouville, divisor, cm4, random, example3)");
}

std::optional<double> default_tau(const std::string& name) {
  if (name.empty() || name == "one") return 1.0;
  if (name == "divisor") return 2.0;
  if (name == "cm4") return 0.5;
  return std::nullopt;
}

std::string command_line(const std::vector<std::string>& args) {
  std::string s = "multmean";
  for (const auto& a : args) s += " " + a;
  return s;
}

int emit(const Options& o, const std::string& command, const std::string& subcommand, ordered_json result,
         const std::vector<Assertion>& assertions) {
  bool passed = true;
  ordered_json checks = ordered_json::array();
  for (const auto& a : assertions) {
    checks.push_back({{"name", a.name}, {"passed", a.passed}});
    passed = passed && a.passed;
  }
  ordered_json doc{{"tool", "multmean"},
                   {"version", "0.1.0"},
                   {"command", command},
                   {"subcommand", subcommand},
                   {"seed", o.seed},
                   {"result", std::move(result)},
                   {"assertions", checks},
                   {"passed", passed}};
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_atomic(o.out, text);
  }
  for (const auto& a : assertions) {
    if (!a.passed) std::cerr << "assertion failed: " << a.name << "\n";
  }
  return passed ? 0 : 2;
}

PrimeSet primes_for(std::uint64_t limit, const Options& o) {
  SieveOptions so;
  so.workers = o.workers;
  return sieve_primes(std::max<std::uint64_t>(limit, 2), so);
}

bool partitions_ok(const DensityReport& r) {
  for (const auto& cp : r.checkpoints) {
    if (cp.partition_error > 1e-12) return false;
    if (r.nonnegative) {
      for (const auto& c : cp.classes) {
        if (c.gamma_hat < 0 || c.gamma_hat > 1) return false;
      }
    }
  }
  return true;
}

std::vector<std::uint64_t> parse_moduli(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dots));
        const auto hi = std::stoull(item.substr(dots + 2));
        if (hi < lo) throw DomainError("empty range");
        for (auto d = lo; d <= hi; ++d) out.push_back(d);
      }
    } catch (const std::exception&) {
      throw DomainError("bad --moduli entry '" + item + "'");
    }
  }
  if (out.empty()) throw DomainError("--moduli is empty");
  for (auto d : out) {
    if (d == 0) throw DomainError("moduli must be >= 1");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_tau_gen(const Options& o, const std::string& cmd) {
  const auto limit = limit_of(o);
  const CoeffTable t = coefficients(o, limit);
  ordered_json sample = ordered_json::object();
  for (std::uint64_t n = 1; n <= std::min<std::uint64_t>(limit, 10); ++n) sample[std::to_string(n)] = t.value_string(n);
  sample[std::to_string(limit)] = t.value_string(limit);
  const auto vanishing = vanishing_indices(t);
  ordered_json result{{"limit", limit},
                      {"weight", t.weight().label()},
                      {"source", t.source().label()},
                      {"sample", sample},
                      {"vanishing", vanishing}};
  if (!o.csv.empty()) {
    save_coeff_table(t, o.csv);
    result["csv"] = o.csv;
    result["csv_sha256"] = sha256_file(o.csv);
  }
  return emit(o, cmd, "tau-gen", result, {{"a_1 = 1", t.value_string(1) == "1"}});
}

int cmd_sieve(const Options& o, const std::string& cmd) {
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  const auto spec = named_spec(o, limit, primes);
  const auto table = sieve_values(spec, limit, primes);
  ordered_json head = ordered_json::array();
  for (std::uint64_t n = 1; n <= std::min<std::uint64_t>(limit, 20); ++n) head.push_back(table[n]);
  ordered_json result{{"spec", table.spec_id()},
                      {"mode", std::string(table.mode())},
                      {"limit", limit},
                      {"prime_count", primes.count()},
                      {"mean_sum", mean_sum(table, static_cast<double>(limit))},
                      {"head", head}};
  if (!o.csv.empty()) {
    export_csv(table, std::filesystem::path(o.csv));
    result["csv"] = o.csv;
  }
  return emit(o, cmd, "sieve", result, {});
}

int cmd_lambda_min(const Options& o, const std::string& cmd) {
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  const auto spec = named_spec(o, limit, primes);
  const auto x = static_cast<double>(limit);
  LambdaOptions lo;
  lo.keep_profile = !o.csv.empty();
  lo.workers = o.workers;
  const double step = o.grid_step > 0 ? o.grid_step : default_grid_step(x);
  const auto rule = spec.prime_rule;
  const LambdaReport r = minimize_lambda(primes, [&rule](std::uint64_t p) { return Complex(rule(p)); }, o.Y, x, o.T,
                                         step, o.refine, lo);
  ordered_json result = to_json(r);
  result.erase("rho_profile");
  result["spec"] = spec.id;
  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv << "t,rho\n";
    for (const auto& s : r.rho_profile) {
      csv << ValueTraits<double>::format(s.t) << ',' << ValueTraits<double>::format(s.rho) << '\n';
    }
    write_atomic(o.csv, csv.str());
    result["csv"] = o.csv;
  }
  return emit(o, cmd, "lambda-min", result, {{"lambda >= 0", r.lambda >= 0}});
}

int cmd_theorem2(const Options& o, const std::string& cmd) {
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  const auto spec = named_spec(o, limit, primes);
  const auto table = sieve_values(spec, limit, primes);
  Theorem2Params params;
  params.Y = o.Y;
  params.x = static_cast<double>(limit);
  params.T = o.T;
  params.c = o.c;
  params.beta = o.beta;
  params.grid_step = o.grid_step;
  params.refine = o.refine;
  const auto rule = spec.prime_rule;
  const auto r = theorem2_evaluate(table, primes, [&rule](std::uint64_t p) { return Complex(rule(p)); }, params);
  ordered_json result = to_json(r);
  result["spec"] = spec.id;
  return emit(o, cmd, "theorem2", result, {});
}

int cmd_sign_eq(const Options& o, const std::string& cmd) {
  const auto cps = checkpoints_of(o);
  const CoeffTable t = coefficients(o, limit_of(o));
  const SignReport r = run_sign_equidistribution(t, cps);
  return emit(o, cmd, "sign-eq", to_json(r),
              {{"deviation nonincreasing within slack", r.trend_nonincreasing}, {"both signs occur", r.generic}});
}

int cmd_density(const Options& o, const std::string& cmd) {
  const auto cps = checkpoints_of(o);
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  SieveTable<double> g;
  if (o.spec.empty() || o.spec == "tau-indicator") {
    g = nonvanish_indicator(coefficients(o, limit));
  } else {
    g = sieve_values(named_spec(o, limit, primes), limit, primes);
  }
  const DensityReport r = run_progression_density(g, o.modulus, cps, primes);
  const ScalingCheck s = run_scaling_check(g, cps);
  ordered_json result = to_json(r);
  result["spec"] = g.spec_id();
  result["scaling"] = to_json(s);
  return emit(o, cmd, "density", result, {{"residue classes partition S_D", partitions_ok(r)}});
}

int cmd_abs_density(const Options& o, const std::string& cmd) {
  const auto cps = checkpoints_of(o);
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  const NormalizedCoeffs nc = normalize(coefficients(o, limit));
  const DensityReport r = run_abs_mean_progressions(nc, o.modulus, cps, primes);
  return emit(o, cmd, "abs-density", to_json(r), {{"residue classes partition the |a_n| sum", partitions_ok(r)}});
}

int cmd_lemma10(const Options& o, const std::string& cmd) {
  const auto cps = checkpoints_of(o);
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  const NormalizedCoeffs nc = normalize(coefficients(o, limit));
  const Lemma10Report r = run_lemma10_chain(nc, primes, cps);
  return emit(o, cmd, "lemma10", to_json(r),
              {{"square-sum difference drift <= 3", r.drift_square <= 3},
               {"abs-sum difference drift <= 3", r.drift_abs <= 3},
               {"negative-sum difference drift <= 3", r.drift_negative <= 3},
               {"sum a_p^2/p comparable to log log x", !r.hypothesis_failure}});
}

int cmd_wirsing(const Options& o, const std::string& cmd) {
  const auto cps = checkpoints_of(o);
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  const auto spec = named_spec(o, limit, primes);
  const auto table = sieve_values(spec, limit, primes);
  const auto tau = o.tau ? o.tau : (o.prime_values.empty() ? default_tau(o.spec) : std::nullopt);
  const WirsingReport r = run_wirsing_check(table, primes, cps, tau);
  return emit(o, cmd, "wirsing", to_json(r), {});
}

int cmd_example3(const Options& o, const std::string& cmd) {
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  const auto f = build_example3(o.c, static_cast<double>(limit), primes);
  const BnSequence seq = generate_bn_until(1e8);
  const BracketingScan scan = scan_bracketing(seq, 1e8);
  bool holds_from_1e4 = true;
  for (auto n : scan.failures) {
    if (seq.at(n) >= 1e4) holds_from_1e4 = false;
  }
  const LambdaGrowth growth = lambda_growth_diagnostic(f, primes, static_cast<double>(limit), o.T, o.grid_step, o.refine);
  ordered_json intervals = ordered_json::array();
  std::size_t truncated = 0;
  for (const auto& a : f.intervals()) {
    intervals.push_back(to_json(a));
    if (a.truncated) ++truncated;
  }
  ordered_json result{{"c", o.c},
                      {"x_max", f.x_max()},
                      {"bracketing", to_json(scan)},
                      {"growth", to_json(growth)},
                      {"truncated_intervals", truncated},
                      {"intervals", intervals}};
  if (!o.csv.empty()) {
    f.export_csv(o.csv);
    result["csv"] = o.csv;
  }
  const double m = growth.mass_ratio;
  return emit(o, cmd, "example3", result,
              {{"bracketing holds for b_n in [1e4, 1e8]", holds_from_1e4},
               {"mass ratio within [0.5c, 1.5c]", m >= 0.5 * o.c && m <= 1.5 * o.c}});
}

int cmd_d_sweep(const Options& o, const std::string& cmd) {
  const auto limit = limit_of(o);
  const PrimeSet primes = primes_for(limit, o);
  SieveTable<double> g;
  if (o.spec.empty() || o.spec == "tau-indicator") {
    g = nonvanish_indicator(coefficients(o, limit));
  } else {
    g = sieve_values(named_spec(o, limit, primes), limit, primes);
  }
  const SweepReport r = run_d_sweep(g, parse_moduli(o.moduli), static_cast<double>(limit));
  ordered_json result = to_json(r);
  result["spec"] = g.spec_id();
  if (!o.csv.empty()) {
    r.write_csv(o.csv);
    result["csv"] = o.csv;
  }
  return emit(o, cmd, "d-sweep", result, {{"all errors finite", r.all_finite}});
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--limit", o.limit, "Table size / x (default: largest checkpoint)");
  sub->add_option("--checkpoints", o.checkpoints, "Comma-separated x values")->delimiter(',');
  sub->add_option("--modulus", o.modulus, "Modulus D");
  sub->add_option("--moduli", o.moduli, "Moduli for d-sweep, e.g. 2..50 or 3,5,7");
  sub->add_option("--T", o.T, "t-window half width");
  sub->add_option("--Y", o.Y, "Lower prime cutoff for rho");
  sub->add_option("--grid-step", o.grid_step, "t-grid step (0: min(0.05, 1/log x))");
  sub->add_option("--refine", o.refine, "Trisection steps per refined cell");
  sub->add_option("--c", o.c, "Constant c");
  sub->add_option("--beta", o.beta, "Bound beta on |g(p)|");
  sub->add_option("--coeff-file", o.coeff_file, "Coefficient CSV 'n,a_n' instead of tau");
  sub->add_option("--weight", o.weight, "Declared weight of --coeff-file (integer or 'normalized')");
  sub->add_option("--spec", o.spec, "one, mobius, liouville, divisor, cm4, random, example3, tau-indicator");
  sub->add_option("--prime-values", o.prime_values, "CSV 'p,value' of prime values");
  sub->add_option("--tau", o.tau, "Declared Wirsing tau");
  sub->add_option("--out", o.out, "JSON report path (default stdout)");
  sub->add_option("--csv", o.csv, "Auxiliary CSV output");
  sub->add_option("--seed", o.seed, "Seed for random specs");
  sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Mean values of multiplicative functions: experiments and checks", "multmean"};
  app.require_subcommand(1);
  Options o;
  using Handler = int (*)(const Options&, const std::string&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"tau-gen", "Generate Ramanujan tau coefficients", cmd_tau_gen},
      {"sieve", "Tabulate a named multiplicative function", cmd_sieve},
      {"lambda-min", "Minimize rho over the t-window", cmd_lambda_min},
      {"theorem2", "Evaluate the Halasz-type bound", cmd_theorem2},
      {"sign-eq", "Sign equidistribution of coefficients", cmd_sign_eq},
      {"density", "Residue-class densities of a nonnegative function", cmd_density},
      {"abs-density", "Residue-class densities of |a_n|", cmd_abs_density},
      {"lemma10", "Prime-sum inequality chain for normalized coefficients", cmd_lemma10},
      {"wirsing", "Wirsing mean-value ratio", cmd_wirsing},
      {"example3", "Adversarial +-1/0 construction and diagnostics", cmd_example3},
      {"d-sweep", "Uniformity error across moduli", cmd_d_sweep},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, handler] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string cmd = command_line(args);
  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return std::get<2>(commands[i])(o, cmd);
    }
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace multmean::cli
