#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "crashfreq/model_spec.hpp"
#include "crashfreq/synthesis.hpp"

using namespace crashfreq;

namespace {

Dataset tiny_dataset() {
  GeneratorConfig cfg = table2_rpnbl_truth(60, 7);
  return synthesize(cfg).sites;
}

Formula small_formula() {
  Formula f;
  f.response = "kabco";
  f.terms = {
      Term{"aadt", TermTransform::NaturalLog, 0.0, {}},
      Term{"avg_on", TermTransform::Identity, 0.0, {}},
      Term{"area", TermTransform::Identity, 0.0, {}},
      Term{"int_type", TermTransform::Identity, 0.0, {}},
  };
  return f;
}

}  // namespace

TEST_CASE("build_design encodes transforms and reference levels") {
  Dataset data = tiny_dataset();
  data[0].aadt = 166.0;
  data[0].area = "com";
  data[0].int_type = "non_signalized";
  const DesignMatrix m = build_design(data, small_formula());

  // intercept, ln_aadt, avg_on, area_res, area_mix, int_type_signalized
  CHECK(m.n_cols == 6);
  CHECK(m.column_names[0] == "const");
  CHECK(m.column_names[1] == "ln_aadt");
  CHECK(m.column_names[3] == "area_res");
  CHECK(m.column_names[4] == "area_mix");
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(0, 1) == doctest::Approx(std::log(166.0)).epsilon(1e-12));
  CHECK(m.at(0, 1) == doctest::Approx(5.112).epsilon(1e-3));
  // Reference levels encode to zero.
  CHECK(m.at(0, 3) == 0.0);
  CHECK(m.at(0, 4) == 0.0);
  CHECK(m.at(0, 5) == 0.0);
}

TEST_CASE("build_design rejects bad inputs") {
  Dataset data = tiny_dataset();

  Formula unknown;
  unknown.terms = {Term{"nonexistent", TermTransform::Identity, 0.0, {}}};
  CHECK_THROWS_AS(build_design(data, unknown), std::invalid_argument);

  Formula logbad;
  logbad.terms = {Term{"median_width", TermTransform::NaturalLog, 0.0, {}}};
  data[3].median_width = 0.0;
  CHECK_THROWS_AS(build_design(data, logbad), std::invalid_argument);

  Formula levelbad;
  levelbad.terms = {Term{"area", TermTransform::Identity, 0.0, std::string("industrial")}};
  CHECK_THROWS_AS(build_design(data, levelbad), std::invalid_argument);
}

TEST_CASE("standardize uses the population SD convention") {
  Dataset data = tiny_dataset();
  data.resize(3);
  for (int i = 0; i < 3; ++i) data[i].avg_on = double(i + 1);  // 1, 2, 3
  Formula f;
  f.terms = {Term{"avg_on", TermTransform::Identity, 0.0, {}}};
  DesignMatrix m = standardize(build_design(data, f));

  const double sd = std::sqrt(2.0 / 3.0);  // population SD of {1,2,3}
  CHECK(m.column_stats[1].mean == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.column_stats[1].sd == doctest::Approx(sd).epsilon(1e-12));
  CHECK(m.at(0, 1) == doctest::Approx(-1.0 / sd).epsilon(1e-12));
  CHECK(m.at(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.at(2, 1) == doctest::Approx(1.0 / sd).epsilon(1e-12));

  // Population mean 0, population SD 1 after the transform.
  double mean = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < 3; ++i) mean += m.at(i, 1);
  mean /= 3.0;
  for (std::size_t i = 0; i < 3; ++i) ss += (m.at(i, 1) - mean) * (m.at(i, 1) - mean);
  CHECK(std::fabs(mean) < 1e-10);
  CHECK(std::fabs(std::sqrt(ss / 3.0) - 1.0) < 1e-10);

  // Idempotence: standardizing again leaves values unchanged.
  DesignMatrix twice = standardize(m);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::fabs(twice.at(i, 1) - m.at(i, 1)) < 1e-10);
  CHECK(twice.column_stats[1].mean == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(twice.column_stats[1].sd == doctest::Approx(sd).epsilon(1e-9));
}

TEST_CASE("standardize rejects constant columns") {
  Dataset data = tiny_dataset();
  for (auto& r : data) r.avg_on = 42.0;
  Formula f;
  f.terms = {Term{"avg_on", TermTransform::Identity, 0.0, {}}};
  CHECK_THROWS_AS(standardize(build_design(data, f)), std::invalid_argument);
}

TEST_CASE("destandardize_coefficients closed-form example") {
  DesignMatrix m;
  m.n_rows = 1;
  m.n_cols = 2;
  m.column_names = {"const", "x"};
  m.continuous = {false, true};
  m.column_stats = {ColumnStats{}, ColumnStats{3.0, 2.0, true}};
  m.values = {1.0, 0.0};

  const auto b = destandardize_coefficients({1.0, 2.0}, m);
  CHECK(b[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b[0] == doctest::Approx(-2.0).epsilon(1e-14));

  // Identity stats give the identity transform.
  m.column_stats[1] = ColumnStats{0.0, 1.0, true};
  const auto same = destandardize_coefficients({1.0, 2.0}, m);
  CHECK(same[0] == 1.0);
  CHECK(same[1] == 2.0);

  CHECK_THROWS_AS(destandardize_coefficients({1.0}, m), std::invalid_argument);
}

TEST_CASE("standardize then destandardize keeps fitted means") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  Dataset data = tiny_dataset();
  Formula f = small_formula();

  DesignMatrix raw = build_design(data, f);
  DesignMatrix std_m = standardize(raw);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> b_std(std_m.n_cols);
    for (auto& v : b_std) v = 0.3 * nd(rng);
    const auto b_orig = destandardize_coefficients(b_std, std_m);
    for (std::size_t i = 0; i < raw.n_rows; ++i) {
      const double m_std =
          mean_response(b_std, &std_m.values[i * std_m.n_cols], std_m.n_cols, 1.0);
      const double m_raw =
          mean_response(b_orig, &raw.values[i * raw.n_cols], raw.n_cols, 1.0);
      CHECK(m_std == doctest::Approx(m_raw).epsilon(1e-8));
    }
  }
}

TEST_CASE("reference level change leaves fitted means unchanged") {
  // Re-expressing coefficients for the complementary indicator of a binary
  // covariate must produce identical fitted means on a full-rank design.
  Dataset data = tiny_dataset();
  Formula f_sig;
  f_sig.terms = {Term{"aadt", TermTransform::NaturalLog, 0.0, {}},
                 Term{"int_type", TermTransform::Identity, 0.0, std::string("signalized")}};
  Formula f_non;
  f_non.terms = {Term{"aadt", TermTransform::NaturalLog, 0.0, {}},
                 Term{"int_type", TermTransform::Identity, 0.0, std::string("non_signalized")}};

  DesignMatrix a = build_design(data, f_sig);
  DesignMatrix b = build_design(data, f_non);

  const std::vector<double> ba = {0.4, 0.2, -0.7};
  // signalized + non_signalized = 1, so absorbing the coefficient into the
  // intercept and flipping its sign is the equivalent parameterization.
  const std::vector<double> bb = {0.4 - 0.7, 0.2, 0.7};
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    const double ma = mean_response(ba, &a.values[i * a.n_cols], a.n_cols, 1.0);
    const double mb = mean_response(bb, &b.values[i * b.n_cols], b.n_cols, 1.0);
    CHECK(ma == doctest::Approx(mb).epsilon(1e-8));
  }
}

TEST_CASE("mean_response basics and intercept absorption") {
  const std::vector<double> b = {0.0, 0.0};
  const double row[2] = {1.0, 3.7};
  CHECK(mean_response(b, row, 2, 1.0) == doctest::Approx(1.0).epsilon(1e-14));

  const double theta = std::sqrt(2.0);
  const double e_lambda = (theta + 2.0) / (theta * (theta + 1.0));
  CHECK(mean_response(b, row, 2, e_lambda) == doctest::Approx(1.0).epsilon(1e-12));

  // exp(b0) * E(lambda) == exp(b0 + log E(lambda)).
  const double b0 = -0.7;
  const std::vector<double> bi = {b0, 0.0};
  const double lhs = mean_response(bi, row, 2, e_lambda);
  const double rhs = std::exp(b0 + std::log(e_lambda));
  CHECK(std::fabs(lhs - rhs) < 1e-12);

  // Clamp guards overflow.
  const std::vector<double> big = {1000.0, 0.0};
  CHECK(std::isfinite(mean_response(big, row, 2, 1.0)));
}

TEST_CASE("prior config derives the Lindley prior from n") {
  const PriorConfig p = PriorConfig::for_observations(596);
  CHECK(p.lindley_beta_a == doctest::Approx(596.0 / 3.0).epsilon(1e-14));
  CHECK(p.lindley_beta_b == doctest::Approx(596.0 / 2.0).epsilon(1e-14));
  // Prior mean of w = 1/(1+theta) is 0.4 independent of n.
  CHECK(p.lindley_beta_a / (p.lindley_beta_a + p.lindley_beta_b) ==
        doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("model spec json round trip") {
  ModelSpec spec;
  spec.family = Family::RpNbL;
  spec.formula = small_formula();
  spec.formula.random_terms = {"aadt"};
  spec.mcmc.n_iter = 500;
  spec.mcmc.burn_in = 100;
  spec.mcmc.seed = 77;
  spec.standardize = true;

  const ModelSpec back = model_spec_from_json(model_spec_to_json(spec));
  CHECK(back.family == Family::RpNbL);
  CHECK(back.formula.terms.size() == spec.formula.terms.size());
  CHECK(back.formula.random_terms == spec.formula.random_terms);
  CHECK(back.mcmc.n_iter == 500);
  CHECK(back.mcmc.seed == 77);
  CHECK(back.standardize);

  CHECK_THROWS_AS(model_spec_from_json("{\"family\": \"weird\"}"),
                  std::invalid_argument);
}

TEST_CASE("random terms must be continuous single-column terms") {
  Dataset data = tiny_dataset();
  Formula f = small_formula();
  f.random_terms = {"area"};
  DesignMatrix m = build_design(data, f);
  CHECK_THROWS_AS(random_column_indices(m, f), std::invalid_argument);

  f.random_terms = {"aadt"};
  const auto idx = random_column_indices(m, f);
  REQUIRE(idx.size() == 1);
  CHECK(m.column_names[idx[0]] == "ln_aadt");
}
