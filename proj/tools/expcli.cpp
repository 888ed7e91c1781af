// Command-line front end: rate sweeps, fidelity checks, hard-instance
// generators, and the transcription check matrix.

#include <bit>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vvmc/experiment.hpp"
#include "vvmc/tabfn_io.hpp"

namespace {

double parse_p(const std::string& s) {
  if (s == "inf") return vvmc::kPInf;
  return std::stod(s);
}

void write_out(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + out_path);
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for mean computation in sequence spaces"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "json", fault, family = "unitvec", p_str = "2";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> cap_override;
  std::int64_t inst_N = 16;
  std::uint64_t seed = 0;
  int fns_per_case = 20;

  CLI::App* rates = app.add_subcommand("rates", "run a rate sweep from a config file");
  rates->add_option("--config", config_path, "sweep config (json)")->required();
  rates->add_option("--seed", seed_override, "override the config seed");
  rates->add_option("--out", out_path, "output path (default: stdout)");
  rates->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  rates->add_option("--cap-qubits", cap_override, "override the simulator wire cap");

  CLI::App* fid = app.add_subcommand("fidelity", "run the exact-identity check suite");
  fid->add_option("--seed", seed, "suite seed");
  fid->add_option("--out", out_path, "output path (default: stdout)");
  fid->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  fid->add_option("--fault", fault, "inject a fault to confirm detection")
      ->check(CLI::IsMember({"walsh-flip"}));

  CLI::App* inst = app.add_subcommand("instances", "emit a hard-instance weight family");
  inst->add_option("--family", family, "unitvec or walsh")
      ->check(CLI::IsMember({"unitvec", "walsh"}));
  inst->add_option("--N", inst_N, "domain size")->required();
  inst->add_option("--p", p_str, "norm exponent (number or inf)");
  inst->add_option("--out", out_path, "output path (default: stdout)");
  inst->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  CLI::App* cc = app.add_subcommand("compile-check",
                                    "compare compiled and classical output distributions");
  cc->add_option("--seed", seed, "case seed");
  cc->add_option("--fns", fns_per_case, "random functions per case")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (rates->parsed()) {
      std::ifstream is(config_path);
      if (!is) throw std::runtime_error("cannot open config: " + config_path);
      vvmc::ordered_json cj;
      is >> cj;
      vvmc::SweepConfig cfg = vvmc::sweep_config_from_json(cj);
      if (seed_override) cfg.seed = *seed_override;
      if (cap_override) cfg.cap_qubits = *cap_override;
      vvmc::validate_config(cfg);
      const vvmc::RateReport rep = vvmc::rate_sweep(cfg);
      std::ostringstream ss;
      vvmc::write_rate_report(rep, ss, format);
      write_out(ss.str(), out_path);
      return 0;
    }
    if (fid->parsed()) {
      const vvmc::FaultInject fi =
          fault == "walsh-flip" ? vvmc::FaultInject::walsh_flip : vvmc::FaultInject::none;
      const auto checks = vvmc::fidelity_suite(seed, fi);
      std::ostringstream ss;
      if (format == "csv") {
        vvmc::write_fidelity_csv(checks, ss);
      } else {
        ss << vvmc::fidelity_to_json(checks).dump(2) << '\n';
      }
      write_out(ss.str(), out_path);
      bool all = true;
      for (const auto& c : checks) all = all && c.pass;
      return all ? 0 : 1;
    }
    if (inst->parsed()) {
      const double p = parse_p(p_str);
      vvmc::TabFn a = [&] {
        if (family == "walsh") {
          if (inst_N < 2 || (inst_N & (inst_N - 1)) != 0)
            throw std::invalid_argument("walsh family needs N a power of two");
          const int level = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(inst_N)) - 1);
          return vvmc::walsh_weights(level, p);
        }
        return vvmc::unit_vector_weights(p, inst_N);
      }();
      std::ostringstream ss;
      if (format == "csv") {
        vvmc::tabfn_to_csv(a, ss);
      } else {
        ss << vvmc::tabfn_to_json(a).dump(2) << '\n';
      }
      write_out(ss.str(), out_path);
      return 0;
    }
    // compile-check
    const vvmc::MatrixResult mr = vvmc::compile_case_matrix(seed, fns_per_case);
    std::ostringstream ss;
    ss << "cases: " << mr.cases << "\ncomparisons: " << mr.comparisons
       << "\nmax_tv: " << mr.max_tv << "\nquery_counts_ok: " << (mr.query_counts_ok ? 1 : 0)
       << "\n";
    write_out(ss.str(), out_path);
    return (mr.max_tv < 1e-9 && mr.query_counts_ok) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
