// Command-line front end: association testing, simulation studies, and
// standalone kernel construction.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kdc/kdc.hpp"

namespace {

struct TestOptions {
  std::string phenotypes;
  std::string genotypes;
  std::string covariates;
  std::string kernel_k = "linear";
  std::string kernel_l = "linear";
  std::int64_t permutations = 10000;
  std::uint64_t seed = 0;
  std::string format = "json";
  int threads = 1;
};

struct SimulateOptions {
  std::string study;
  std::string effect;  // sim2: restrict to sparse|common
  std::string sigma;   // sim2: restrict to independent|dependent
  std::vector<double> a_grid;
  int reps = 1000;
  std::int64_t perms = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
  int threads = 1;
  bool rbf_sweep = false;
};

struct KernelOptions {
  std::string input;
  std::string kernel = "linear";
  std::string out;
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw kdc::InvalidInput("cannot write '" + out_path + "'");
  out << text;
}

int cmd_test(const TestOptions& opt) {
  const kdc::KernelSpec spec_k = kdc::KernelSpec::parse(opt.kernel_k);
  const kdc::KernelSpec spec_l = kdc::KernelSpec::parse(opt.kernel_l);

  const kdc::Matrix y =
      kdc::ingest_matrix(opt.phenotypes, kdc::MatrixKind::phenotype);
  const kdc::Matrix z = kdc::ingest_matrix(
      opt.genotypes, spec_k.needs_genotypes() ? kdc::MatrixKind::genotype
                                              : kdc::MatrixKind::phenotype);
  std::optional<kdc::CovariateMatrix> covariates;
  if (!opt.covariates.empty())
    covariates = kdc::CovariateMatrix{
        kdc::ingest_matrix(opt.covariates, kdc::MatrixKind::covariate), true};

  kdc::PermutationPlan plan;
  plan.n_permutations = opt.permutations;
  plan.seed = opt.seed;
  const kdc::TestResult result =
      kdc::run_test(y, z, covariates, spec_k, spec_l, plan,
                    resolve_threads(opt.threads));

  if (opt.format == "csv")
    std::cout << kdc::test_result_csv(result);
  else
    std::cout << kdc::test_result_json(result).dump(2) << '\n';
  return 0;
}

int cmd_simulate(const SimulateOptions& opt) {
  kdc::StudyResult result;
  if (opt.study == "sim1") {
    kdc::Sim1StudyParams params;
    params.replicates = opt.reps;
    params.permutations = opt.perms;
    params.alpha = opt.alpha;
    params.seed = opt.seed;
    params.threads = resolve_threads(opt.threads);
    if (!opt.a_grid.empty()) params.a_grid = opt.a_grid;
    result = kdc::run_sim1_study(params);
  } else if (opt.study == "sim2") {
    kdc::Sim2StudyParams params;
    params.replicates = opt.reps;
    params.permutations = opt.perms;
    params.alpha = opt.alpha;
    params.seed = opt.seed;
    params.threads = resolve_threads(opt.threads);
    if (!opt.a_grid.empty()) params.a_grid = opt.a_grid;
    if (opt.sigma == "independent")
      params.sigma_grid = {kdc::Sim2Sigma::independent};
    else if (opt.sigma == "dependent")
      params.sigma_grid = {kdc::Sim2Sigma::dependent};
    else if (!opt.sigma.empty())
      throw kdc::UsageError("unknown sigma '" + opt.sigma +
                            "'; expected independent|dependent");
    if (opt.effect == "sparse")
      params.effect_grid = {kdc::Sim2Effect::sparse};
    else if (opt.effect == "common")
      params.effect_grid = {kdc::Sim2Effect::common};
    else if (!opt.effect.empty())
      throw kdc::UsageError("unknown effect '" + opt.effect +
                            "'; expected sparse|common");
    result = kdc::run_sim2_study(params);
  } else if (opt.study == "adni") {
    kdc::AdniStudyParams params;
    params.replicates = opt.reps;
    params.permutations = opt.perms;
    params.alpha = opt.alpha;
    params.seed = opt.seed;
    params.threads = resolve_threads(opt.threads);
    params.rbf_sweep = opt.rbf_sweep;
    if (!opt.a_grid.empty()) params.a_grid = opt.a_grid;
    result = kdc::run_adni_study(params);
  } else {
    throw kdc::UsageError("unknown study '" + opt.study +
                          "'; expected sim1|sim2|adni");
  }

  if (opt.format == "csv")
    emit(kdc::study_csv(result), opt.out);
  else
    emit(kdc::study_json(result).dump(2) + "\n", opt.out);
  return 0;
}

int cmd_kernel(const KernelOptions& opt) {
  const kdc::KernelSpec spec = kdc::KernelSpec::parse(opt.kernel);
  const kdc::Matrix samples = kdc::ingest_matrix(
      opt.input, spec.needs_genotypes() ? kdc::MatrixKind::genotype
                                        : kdc::MatrixKind::phenotype);
  const kdc::GramMatrix k = kdc::build_kernel(spec, samples);
  std::vector<std::string> header(std::size_t(k.n()));
  for (std::size_t i = 0; i < header.size(); ++i)
    header[i] = std::to_string(i + 1);
  kdc::write_csv_matrix(opt.out, header, k.values);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel association tests for multivariate phenotypes"};
  app.require_subcommand(1);

  TestOptions test_opt;
  CLI::App* test = app.add_subcommand(
      "test", "permutation test of association between two sample files");
  test->add_option("--phenotypes", test_opt.phenotypes, "phenotype CSV")
      ->required();
  test->add_option("--genotypes", test_opt.genotypes, "genotype CSV")
      ->required();
  test->add_option("--covariates", test_opt.covariates,
                   "covariate CSV (intercept added automatically)");
  test->add_option("--kernel-k", test_opt.kernel_k,
                   "genotype kernel (linear|quadratic|ibs|l2|gower|rbf:<rho>|"
                   "poly:<c>:<d>)");
  test->add_option("--kernel-l", test_opt.kernel_l, "phenotype kernel");
  test->add_option("--permutations", test_opt.permutations,
                   "Monte Carlo permutation count")
      ->required();
  test->add_option("--seed", test_opt.seed, "permutation seed")->required();
  test->add_option("--format", test_opt.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  test->add_option("--threads", test_opt.threads, "worker threads (0 = auto)");

  SimulateOptions sim_opt;
  std::string sim_study_positional;
  CLI::App* simulate =
      app.add_subcommand("simulate", "size/power study on synthetic data");
  simulate->add_option("--study", sim_opt.study, "sim1|sim2|adni")
      ->check(CLI::IsMember({"sim1", "sim2", "adni"}));
  simulate->add_option("STUDY", sim_study_positional,
                       "study name (alternative to --study)")
      ->check(CLI::IsMember({"sim1", "sim2", "adni"}));
  simulate->add_option("--effect", sim_opt.effect,
                       "sim2 effect shape (sparse|common; default both)");
  simulate->add_option("--sigma", sim_opt.sigma,
                       "sim2 error structure (independent|dependent; default "
                       "both)");
  simulate->add_option("--a", sim_opt.a_grid,
                       "signal strengths (default: the study's grid)")
      ->delimiter(',');
  simulate->add_option("--reps", sim_opt.reps, "replicates per cell");
  simulate->add_option("--perms", sim_opt.perms, "permutations per test");
  simulate->add_option("--alpha", sim_opt.alpha, "rejection level");
  simulate->add_option("--seed", sim_opt.seed, "study seed")->required();
  simulate->add_option("--format", sim_opt.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--out", sim_opt.out, "output path (default stdout)");
  simulate->add_option("--threads", sim_opt.threads,
                       "worker threads (0 = auto)");
  simulate->add_flag("--rbf-sweep", sim_opt.rbf_sweep,
                     "adni: sweep rbf phenotype kernels instead of the "
                     "default rows");

  KernelOptions kernel_opt;
  CLI::App* kernel =
      app.add_subcommand("kernel", "write a kernel matrix for a sample file");
  kernel->add_option("--input", kernel_opt.input, "sample CSV")->required();
  kernel->add_option("--kernel", kernel_opt.kernel, "kernel spec");
  kernel->add_option("--out", kernel_opt.out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (test->parsed()) return cmd_test(test_opt);
    if (simulate->parsed()) {
      if (sim_opt.study.empty()) sim_opt.study = sim_study_positional;
      if (sim_opt.study.empty())
        throw kdc::UsageError("missing study; pass --study sim1|sim2|adni");
      return cmd_simulate(sim_opt);
    }
    if (kernel->parsed()) return cmd_kernel(kernel_opt);
    return 2;
  } catch (const kdc::RankDeficient& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const kdc::DegenerateFit& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const kdc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}
