// mpsperm command line: compute, verify, generate, factorize, rcm, bench.
//
// Exit codes: 0 success, 2 invalid input or flags, 3 numerical failure,
// 4 verify disagreement, 5 singular input to factorize.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mpsperm/engine.hpp"
#include "mpsperm/factorize.hpp"
#include "mpsperm/io.hpp"
#include "mpsperm/oracle.hpp"

namespace {

using namespace mpsperm;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitDisagree = 4;
constexpr int kExitSingular = 5;

constexpr double kVerifyTolerance = 1e-8;

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::Singular:
      return false;
    default:
      return true;
  }
}

BlockFactorizationd load_factorization(const std::string& path) {
  auto f = io::factorization_from_json(io::read_json_file(path));
  validate_factorization(f);
  return f;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    io::write_json_file(out_path, j);
}

PermanentResult<double> run_engine(BlockFactorizationd f, double tolerance, int verbosity, bool dump_gates) {
#ifdef MPSPERM_MUTANT_ENGINE
  // Test fixture: applies the layers in reverse, the classic ordering bug.
  std::reverse(f.factors.begin(), f.factors.end());
#endif
  EngineOptions<double> options;
  options.tolerance = tolerance;
  if (verbosity >= 1)
    options.on_layer = [](const LayerReport<double>& report) {
      std::cerr << "layer " << report.layer << ":";
      for (const auto& site : report.state.sites)
        std::cerr << " (" << site.phys_dim() << "," << site.left_dim() << "," << site.right_dim() << ")";
      std::cerr << "\n";
    };
  if (verbosity >= 2)
    options.on_svd = [](std::size_t layer, const TwoSiteUpdate<double>& u) {
      std::cerr << "  layer " << layer << " bond " << u.bond << " kept " << u.kept << "/" << u.full_rank
                << " sigma:";
      for (Eigen::Index i = 0; i < u.singular.size(); ++i) std::cerr << " " << u.singular(i);
      std::cerr << "\n";
    };
  if (dump_gates)
    options.on_gate = [](std::size_t layer, const TwoSiteGate<double>& g) {
      std::cerr << "layer " << layer << " ";
      dump_nonzeros(std::cerr, g);
    };
  return compute_permanent(f, options);
}

int cmd_compute(const std::string& path, double tolerance, int verbosity, bool dump_gates) {
  const auto f = load_factorization(path);
  const auto result = run_engine(f, tolerance, verbosity, dump_gates);
  std::cout << json{{"permanent", io::to_json(result.permanent)}, {"stats", io::to_json(result.stats)}}.dump(2)
            << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& path, double tolerance) {
  const auto f = load_factorization(path);
  if (f.dim > static_cast<std::size_t>(kRyserMaxSize))
    throw Error(ErrorCode::TooLarge, "verify: N = " + std::to_string(f.dim) + " exceeds the Ryser cap of 24");
  const auto result = run_engine(f, tolerance, 0, false);
  const Complexd ryser = permanent_ryser(reconstruct(f));
  const double err = relative_error(result.permanent, ryser);
  const bool agree = err <= kVerifyTolerance;
  std::cout << json{{"engine", io::to_json(result.permanent)},
                    {"ryser", io::to_json(ryser)},
                    {"relative_error", err},
                    {"agree", agree}}
                   .dump(2)
            << "\n";
  if (!agree) std::cerr << "verify: engine and Ryser disagree (relative error " << err << ")\n";
  return agree ? kExitOk : kExitDisagree;
}

int cmd_generate(std::size_t n, std::size_t l, std::uint64_t seed, double density, const std::string& out) {
  emit(io::to_json(generate_random_factorization(n, l, seed, density)), out);
  return kExitOk;
}

int cmd_factorize(const std::string& path, const std::string& out) {
  const auto m = io::matrix_from_json(io::read_json_file(path));
  const auto dec = decompose_dense_block(m);
  std::cerr << "factorize: " << dec.factorization.layers() << " factors, condition number "
            << dec.condition_number << "\n";
  emit(io::to_json(dec.factorization), out);
  return kExitOk;
}

int cmd_rcm(const std::string& path, double zero_threshold, const std::string& out) {
  const auto m = io::matrix_from_json(io::read_json_file(path));
  const auto p = rcm_permutation(m, zero_threshold);
  std::cerr << "rcm: bandwidth " << bandwidth(m, zero_threshold) << " -> "
            << bandwidth(permute_symmetric<double>(p, m), zero_threshold) << "\n";
  emit(io::to_json(p), out);
  return kExitOk;
}

int cmd_bench(std::size_t max_n, std::size_t l, std::size_t repeats, std::uint64_t seed, double density,
              double tolerance) {
  std::cout << "n,l,wall_time_s,max_bond,svd_count\n";
  for (std::size_t n = 8; n <= max_n; n *= 2) {
    const auto f = generate_random_factorization(n, l, seed, density);
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto result = compute_permanent(f, tolerance);
      std::cout << n << "," << l << "," << std::setprecision(6) << result.stats.wall_time << ","
                << result.stats.max_bond << "," << result.stats.svd_count << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permanents of block-factorized matrices via matrix product states"};
  app.require_subcommand(1);

  double tolerance = kDefaultTolerance;
  int verbosity = 0;
  std::string input;
  std::string out;

  auto* compute = app.add_subcommand("compute", "Permanent of a factorization file");
  compute->add_option("file", input, "Factorization JSON")->required();
  compute->add_option("--tolerance", tolerance, "Relative singular value cutoff (0 disables truncation)")
      ->check(CLI::NonNegativeNumber);
  compute->add_flag("-v", verbosity, "Per-layer site dimensions (-vv adds singular spectra)");
  bool dump_gates = false;
  compute->add_flag("--dump-gates", dump_gates, "Print nonzero two-site gate coefficients to stderr");

  auto* verify = app.add_subcommand("verify", "Compare the engine against Ryser on the reconstructed matrix");
  verify->add_option("file", input, "Factorization JSON")->required();
  verify->add_option("--tolerance", tolerance)->check(CLI::NonNegativeNumber);

  std::size_t n = 0;
  std::size_t layers = 0;
  std::uint64_t seed = 0;
  double density = 0.5;
  auto* generate = app.add_subcommand("generate", "Write a seeded random factorization");
  generate->add_option("-n,--n", n, "Matrix size")->required()->check(CLI::PositiveNumber);
  generate->add_option("-l,--layers", layers, "Number of factors")->required()->check(CLI::PositiveNumber);
  generate->add_option("--seed", seed);
  generate->add_option("--density", density, "Probability of opening a 2x2 block")->check(CLI::Range(0.0, 1.0));
  generate->add_option("--out", out, "Output path (stdout when omitted)");

  auto* factorize = app.add_subcommand("factorize", "Split a dense invertible matrix (n <= 8) into 2x2 factors");
  factorize->add_option("file", input, "Dense matrix JSON")->required();
  factorize->add_option("--out", out);

  double zero_threshold = 0.0;
  auto* rcm = app.add_subcommand("rcm", "Reverse Cuthill-McKee permutation of a dense matrix");
  rcm->add_option("file", input, "Dense matrix JSON")->required();
  rcm->add_option("--zero-threshold", zero_threshold)->check(CLI::NonNegativeNumber);
  rcm->add_option("--out", out);

  std::size_t max_n = 64;
  std::size_t repeats = 1;
  double bench_density = 1.0;
  auto* bench = app.add_subcommand("bench", "CSV timings over n = 8, 16, ... max-n");
  bench->add_option("--max-n", max_n)->check(CLI::Range(8, 1 << 20));
  bench->add_option("-l,--layers", layers)->required()->check(CLI::Range(1, 16));
  bench->add_option("--repeats", repeats)->check(CLI::Range(1, 1000));
  bench->add_option("--seed", seed);
  bench->add_option("--density", bench_density)->check(CLI::Range(0.0, 1.0));
  bench->add_option("--tolerance", tolerance)->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*compute) return cmd_compute(input, tolerance, verbosity, dump_gates);
    if (*verify) return cmd_verify(input, tolerance);
    if (*generate) return cmd_generate(n, layers, seed, density, out);
    if (*factorize) return cmd_factorize(input, out);
    if (*rcm) return cmd_rcm(input, zero_threshold, out);
    if (*bench) return cmd_bench(max_n, layers, repeats, seed, bench_density, tolerance);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::Singular) return kExitSingular;
    return is_input_error(e.code()) ? kExitInvalid : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInvalid;
}
