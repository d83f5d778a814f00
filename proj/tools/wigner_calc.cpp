#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wigner/verify.hpp"

namespace {

using namespace wigner;
using namespace wigner::verify;

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_suites(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

template <typename T>
void from_file(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

void apply_config_file(const std::string& path, SuiteConfig& cfg) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  static const std::set<std::string> known{"suite",       "suites", "seed",  "basis",  "max_degree", "fock_level",
                                           "tol",         "gue_dim", "gue_samples", "block"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError(path + ": unknown field '" + key + "'");
  from_file(j, "basis", cfg.basis);
  from_file(j, "max_degree", cfg.max_degree);
  from_file(j, "fock_level", cfg.fock_level);
  from_file(j, "seed", cfg.seed);
  from_file(j, "gue_dim", cfg.gue_dim);
  from_file(j, "gue_samples", cfg.gue_samples);
  from_file(j, "block", cfg.block);
  if (j.contains("tol") && !j["tol"].is_null()) {
    double t = 0;
    from_file(j, "tol", t);
    cfg.tol = t;
  }
  for (const char* key : {"suite", "suites"}) {
    if (!j.contains(key)) continue;
    if (j[key].is_string()) {
      cfg.suites = split_suites({j[key].get<std::string>()});
    } else {
      std::vector<std::string> v;
      from_file(j, key, v);
      cfg.suites = split_suites(v);
    }
  }
}

void describe(const ChaosExpansion& f, std::ostream& os) {
  const cx t = trace(f);
  os << "degree " << f.degree() << "\n";
  os << "tau " << format_double(t.real()) << " " << format_double(t.imag()) << "i\n";
  os << "L2 norm " << format_double(norm2(f)) << "\n";
  os << "variance " << format_double(norm2_squared(centered(f))) << "\n";
  os << "self-adjoint " << (is_self_adjoint(f) ? "yes" : "no") << "\n";
  for (const auto& [n, k] : f.components())
    os << "  I_" << n << ": " << k.entries().size() << " entries, norm " << format_double(norm(k)) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free Malliavin calculus identity checker"};
  app.require_subcommand(1);

  SuiteConfig cfg;
  std::vector<std::string> suites;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> basis, max_degree, fock_level, gue_dim, gue_samples;
  std::optional<double> tol;
  std::string report_path, config_path, format = "json";
  bool no_timing = false;

  auto* verify = app.add_subcommand("verify", "Run identity suites and emit a report");
  verify->add_option("--suite", suites, "Suite name, repeatable or comma separated (default: all)");
  verify->add_option("--seed", seed, "Master seed (fallback: WIGNER_CALC_SEED, then 42)");
  verify->add_option("--basis", basis, "Basis size d");
  verify->add_option("--max-degree", max_degree, "Maximum chaos degree D");
  verify->add_option("--fock-level", fock_level, "Fock truncation level L");
  verify->add_option("--tol", tol, "Tolerance for every deterministic check");
  verify->add_option("--gue-dim", gue_dim, "GUE matrix size N");
  verify->add_option("--gue-samples", gue_samples, "GUE sample count M");
  verify->add_option("--report", report_path, "Write the report here instead of stdout");
  verify->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "table"}));
  verify->add_option("--config", config_path, "JSON file mirroring the flags; flags win");
  verify->add_flag("--no-timing", no_timing, "Omit elapsed times from the report");

  std::string input;
  auto* inspect = app.add_subcommand("inspect", "Read a serialized chaos expansion and print its invariants");
  inspect->add_option("file", input, "Chaos JSON file, or - for stdin")->required();

  std::string canon_input;
  std::string kind = "chaos";
  auto* canon = app.add_subcommand("canonicalize", "Parse a serialized object and write it back in canonical form");
  canon->add_option("file", canon_input, "JSON file, or - for stdin")->required();
  canon->add_option("--kind", kind, "Record kind")->check(CLI::IsMember({"kernel", "chaos", "gradient"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const auto read_input = [](const std::string& path) {
    if (path == "-") {
      std::stringstream ss;
      ss << std::cin.rdbuf();
      return ss.str();
    }
    return slurp(path);
  };

  try {
    if (*inspect) {
      describe(deserialize_chaos(read_input(input)), std::cout);
      return 0;
    }
    if (*canon) {
      const std::string text = read_input(canon_input);
      if (kind == "kernel") std::cout << serialize(deserialize_kernel(text)) << "\n";
      if (kind == "chaos") std::cout << serialize(deserialize_chaos(text)) << "\n";
      if (kind == "gradient") std::cout << serialize(deserialize_gradient(text)) << "\n";
      return 0;
    }

    if (const char* env = std::getenv("WIGNER_CALC_SEED"); env) {
      try {
        std::size_t used = 0;
        cfg.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("WIGNER_CALC_SEED is not an integer: '") + env + "'");
      }
    }
    if (!config_path.empty()) apply_config_file(config_path, cfg);
    if (seed) cfg.seed = *seed;
    if (!suites.empty()) cfg.suites = split_suites(suites);
    if (basis) cfg.basis = *basis;
    if (max_degree) cfg.max_degree = *max_degree;
    if (fock_level) cfg.fock_level = *fock_level;
    if (tol) cfg.tol = *tol;
    if (gue_dim) cfg.gue_dim = *gue_dim;
    if (gue_samples) cfg.gue_samples = *gue_samples;

    const Report report = run_suite(cfg);
    const std::string text = report_emit(report, format == "table" ? Format::Table : Format::Json, !no_timing);
    if (report_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(report_path);
      if (!out) throw ConfigError("cannot write '" + report_path + "'");
      out << text;
    }
    if (!report.all_passed()) {
      std::cerr << report.checks.size() - report.passed() << " of " << report.checks.size() << " checks failed\n";
      return kExitFail;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  }
}
