#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgamarket/cli/config.hpp"

namespace pgamarket::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline constexpr std::uint64_t kMinVerifyBlocks = 100000;

/// Oracle battery: closed forms against quadrature, Monte Carlo against
/// closed forms, best-response scans and rank monotonicity.
std::vector<CheckResult> run_verify(const RunConfig& cfg, const MarketParams& params, int M,
                                    std::uint64_t n_blocks, std::uint64_t seed, int workers);

}  // namespace pgamarket::cli
