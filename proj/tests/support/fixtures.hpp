#pragma once

// Hand-built fit inputs for driving sampler kernels directly.

#include <string>
#include <vector>

#include "crashfreq/sampler.hpp"

namespace fixtures {

// Intercept-only design with the given responses.
inline crashfreq::FitData intercept_only(const std::vector<int>& y) {
  crashfreq::FitData fd;
  crashfreq::DesignMatrix& m = fd.design;
  m.n_rows = y.size();
  m.n_cols = 1;
  m.column_names = {"const"};
  m.continuous = {false};
  m.column_stats = {crashfreq::ColumnStats{}};
  m.values.assign(y.size(), 1.0);
  for (std::size_t i = 0; i < y.size(); ++i)
    m.site_ids.push_back("S" + std::to_string(i + 1));
  fd.response = y;
  return fd;
}

// Intercept plus one continuous covariate.
inline crashfreq::FitData one_covariate(const std::vector<int>& y,
                                        const std::vector<double>& x,
                                        bool random_term = false) {
  crashfreq::FitData fd;
  crashfreq::DesignMatrix& m = fd.design;
  m.n_rows = y.size();
  m.n_cols = 2;
  m.column_names = {"const", "avg_on"};
  m.continuous = {false, true};
  m.column_stats = {crashfreq::ColumnStats{}, crashfreq::ColumnStats{}};
  m.values.resize(2 * y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    m.values[2 * i] = 1.0;
    m.values[2 * i + 1] = x[i];
    m.site_ids.push_back("S" + std::to_string(i + 1));
  }
  fd.response = y;
  (void)random_term;
  return fd;
}

inline crashfreq::ModelSpec basic_spec(crashfreq::Family family,
                                       int n_iter, int burn_in,
                                       std::uint64_t seed) {
  crashfreq::ModelSpec spec;
  spec.family = family;
  spec.formula.response = "kabco";
  spec.standardize = false;
  spec.mcmc.n_iter = n_iter;
  spec.mcmc.burn_in = burn_in;
  spec.mcmc.seed = seed;
  spec.mcmc.n_chains = 2;
  spec.mcmc.latent_thin = 1;
  return spec;
}

}  // namespace fixtures
