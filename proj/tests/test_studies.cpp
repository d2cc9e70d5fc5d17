#include <catch2/catch_amalgamated.hpp>

#include "kdc/studies.hpp"
#include "test_util.hpp"

using kdc::Index;
using kdc::KernelSpec;
using kdc::Matrix;
using kdc::MethodSpec;
using kdc::StudyCondition;
using kdc::StudyResult;
using kdc::Vector;

namespace {

std::vector<StudyCondition> one_condition(Index n, double a,
                                          std::size_t n_methods) {
  kdc::Sim1Config cfg;
  cfg.n = n;
  cfg.a = a;
  std::vector<std::size_t> rows(n_methods);
  for (std::size_t i = 0; i < n_methods; ++i) rows[i] = i;
  return {{a, "", "",
           [cfg](std::uint64_t s) { return kdc::sim1_generate(cfg, s); },
           rows}};
}

}  // namespace

TEST_CASE("method tables have the expected layout") {
  const auto sim1 = kdc::sim1_default_methods();
  REQUIRE(sim1.size() == 7);
  CHECK(sim1[0].family == "KMR");
  CHECK(sim1[0].kernel_k.str() == "linear");
  CHECK(sim1[1].kernel_k.str() == "quadratic");
  CHECK(sim1[2].family == "KDC");
  CHECK(sim1[2].kernel_k.str() == "l2");
  CHECK(sim1[2].kernel_l.str() == "l2");
  CHECK(sim1[6].kernel_k.str() == "quadratic");
  CHECK(sim1[6].kernel_l.str() == "quadratic");
  for (const MethodSpec& m : sim1) CHECK(m.adjusted);

  const auto table = kdc::table_default_methods(true);
  REQUIRE(table.size() == 10);
  CHECK(table[2].kernel_k.str() == "ibs");
  CHECK(table[2].family == "KMR");
  CHECK(table[3].kernel_k.str() == "l2");
  CHECK(table[7].kernel_l.str() == "quadratic");
  CHECK(table[9].kernel_k.str() == "ibs");
  CHECK(table[9].kernel_l.str() == "quadratic");
  for (const MethodSpec& m : kdc::table_default_methods(false))
    CHECK(!m.adjusted);

  const auto sweep = kdc::rbf_sweep_methods();
  REQUIRE(sweep.size() == 15);
  CHECK(sweep[0].kernel_l.str() == "rbf:0.1");
  CHECK(sweep[14].kernel_l.str() == "rbf:10");
  CHECK(sweep[14].kernel_k.str() == "ibs");
}

TEST_CASE("study parameter validation") {
  const auto methods = kdc::sim1_default_methods();
  const auto conditions = one_condition(20, 0.0, methods.size());
  REQUIRE_THROWS_AS(
      kdc::size_power_study(methods, conditions, 0, 200, 0.05, 1),
      kdc::InvalidParameter);
  REQUIRE_THROWS_AS(
      kdc::size_power_study(methods, conditions, 5, 99, 0.05, 1),
      kdc::InvalidParameter);
  REQUIRE_THROWS_AS(
      kdc::size_power_study(methods, conditions, 5, 200, 0.0, 1),
      kdc::InvalidParameter);
  REQUIRE_THROWS_AS(
      kdc::size_power_study(methods, conditions, 5, 200, 1.0, 1),
      kdc::InvalidParameter);
  REQUIRE_THROWS_AS(kdc::size_power_study({}, conditions, 5, 200, 0.05, 1),
                    kdc::InvalidParameter);
  const auto bad = one_condition(20, 0.0, methods.size() + 1);
  REQUIRE_THROWS_AS(kdc::size_power_study(methods, bad, 5, 200, 0.05, 1),
                    kdc::InvalidParameter);
}

TEST_CASE("duplicated method rows produce identical cells") {
  const KernelSpec lin = KernelSpec::linear();
  const std::vector<MethodSpec> methods = {
      {"KMR", lin, lin, true},
      {"KDC", lin, lin, true},
      {"KDC", KernelSpec::gower(), lin, true},
  };
  const auto conditions = one_condition(30, 0.6, methods.size());
  const StudyResult r =
      kdc::size_power_study(methods, conditions, 25, 199, 0.05, 424242);
  REQUIRE(r.cells.size() == 3);
  CHECK(r.cells[0].rejections == r.cells[1].rejections);
  CHECK(r.cells[0].rejections == r.cells[2].rejections);
}

TEST_CASE("study is deterministic and independent of the thread count") {
  kdc::Sim1StudyParams params;
  params.n = 24;
  params.a_grid = {0.0, 1.0};
  params.replicates = 12;
  params.permutations = 150;
  params.seed = 88;

  const StudyResult base = kdc::run_sim1_study(params);
  const StudyResult again = kdc::run_sim1_study(params);
  REQUIRE(base.cells.size() == again.cells.size());
  for (std::size_t i = 0; i < base.cells.size(); ++i)
    CHECK(base.cells[i].rejections == again.cells[i].rejections);

  for (const int threads : {2, 4, 16}) {
    kdc::Sim1StudyParams p = params;
    p.threads = threads;
    const StudyResult parallel = kdc::run_sim1_study(p);
    REQUIRE(parallel.cells.size() == base.cells.size());
    for (std::size_t i = 0; i < base.cells.size(); ++i)
      CHECK(parallel.cells[i].rejections == base.cells[i].rejections);
  }

  kdc::Sim1StudyParams other = params;
  other.seed = 89;
  const StudyResult different = kdc::run_sim1_study(other);
  bool any_diff = false;
  for (std::size_t i = 0; i < base.cells.size(); ++i)
    any_diff = any_diff ||
               different.cells[i].rejections != base.cells[i].rejections;
  CHECK(any_diff);
}

TEST_CASE("sim1 study separates null and strong signal") {
  kdc::Sim1StudyParams params;
  params.n = 50;
  params.a_grid = {0.0, 2.0};
  params.replicates = 30;
  params.permutations = 199;
  params.seed = 20240601;
  const StudyResult r = kdc::run_sim1_study(params);
  REQUIRE(r.cells.size() == 14);
  CHECK(r.study == "sim1");
  CHECK(r.replicates == 30);
  CHECK(r.permutations == 199);
  for (const kdc::StudyCell& c : r.cells) {
    CHECK(c.rate >= 0.0);
    CHECK(c.rate <= 1.0);
    CHECK(c.rejections <= r.replicates);
    if (c.a == 0.0) CHECK(c.rate <= 0.2);
    if (c.a == 2.0 && c.method.family == "KMR" &&
        c.method.kernel_k.str() == "linear")
      CHECK(c.rate >= 0.8);
  }
}

TEST_CASE("sim2 study emits raw-phenotype rows only under signal") {
  kdc::Sim2StudyParams params;
  params.n = 40;
  params.a_grid = {0.0, 0.5};
  params.sigma_grid = {kdc::Sim2Sigma::independent};
  params.effect_grid = {kdc::Sim2Effect::sparse};
  params.replicates = 2;
  params.permutations = 120;
  params.seed = 3;
  const StudyResult r = kdc::run_sim2_study(params);
  CHECK(r.study == "sim2");
  REQUIRE(r.cells.size() == 30);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(r.cells[i].a == 0.0);
    CHECK(r.cells[i].method.adjusted);
    CHECK(r.cells[i].sigma == "independent");
    CHECK(r.cells[i].effect == "sparse");
  }
  int raw = 0;
  for (std::size_t i = 10; i < 30; ++i) {
    CHECK(r.cells[i].a == 0.5);
    raw += r.cells[i].method.adjusted ? 0 : 1;
  }
  CHECK(raw == 10);
  REQUIRE(r.log.count("maf") == 1);

  params.include_unadjusted = false;
  const StudyResult adj_only = kdc::run_sim2_study(params);
  CHECK(adj_only.cells.size() == 20);
  for (const kdc::StudyCell& c : adj_only.cells) CHECK(c.method.adjusted);
}

TEST_CASE("sim2 maf is shared, logged and overridable") {
  kdc::Sim2StudyParams params;
  params.n = 40;
  params.a_grid = {0.0};
  params.sigma_grid = {kdc::Sim2Sigma::independent};
  params.effect_grid = {kdc::Sim2Effect::sparse};
  params.replicates = 1;
  params.permutations = 120;
  params.seed = 14;
  params.maf = Vector::Constant(9, 0.25);
  const StudyResult r = kdc::run_sim2_study(params);
  CHECK(r.log.at("maf") == "0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25");
}

TEST_CASE("adni study runs the table layout and logs its inputs") {
  kdc::AdniStudyParams params;
  params.n = 30;
  params.a_grid = {0.0};
  params.replicates = 2;
  params.permutations = 120;
  params.seed = 7;
  const StudyResult r = kdc::run_adni_study(params);
  CHECK(r.study == "adni");
  REQUIRE(r.cells.size() == 10);
  REQUIRE(r.log.count("maf") == 1);
  std::size_t commas = 0;
  for (const char c : r.log.at("maf"))
    if (c == ',') ++commas;
  CHECK(commas == 140);
  CHECK(r.log.count("clipped_eigenvalues") == 1);

  params.rbf_sweep = true;
  params.replicates = 1;
  const StudyResult sweep = kdc::run_adni_study(params);
  CHECK(sweep.cells.size() == 15);
  for (const kdc::StudyCell& c : sweep.cells)
    CHECK(c.method.kernel_l.str().rfind("rbf:", 0) == 0);
}
