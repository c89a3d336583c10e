#pragma once

#include <string>

#include "crashfreq/sampler.hpp"

namespace crashfreq {

// On-disk layout of a saved fit (format version 1):
//   <dir>/fit.json      model, design-column metadata, site ids, chain list
//   <dir>/chain_<k>.bin "CFCHAIN1", u32 header length, JSON header, then
//                       little-endian f64 blocks: scalars (iteration-major),
//                       latents (iteration-major), site coefficients.
// Scalars cover every stored iteration including burn-in; latents start at
// the first post-burn-in iteration, at stride latent_thin.
void save_fit(const FitResult& fit, const std::string& dir);
FitResult load_fit(const std::string& dir);

inline constexpr int kDrawsFormatVersion = 1;

}  // namespace crashfreq
