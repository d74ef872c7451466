#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pgamarket/random.hpp"

namespace pgamarket {

enum class ValuationFamily {
  UniformOnFeeToMax,     // uniform on [pi, v_bar]; params = {pi}
  UniformOnZeroToMax,    // uniform on [0, v_bar]
  TruncatedExponential,  // density ~ exp(-rate * v) on [0, v_bar]; params = {rate}
  ScaledBeta,            // v_bar * Beta(a, b), a, b >= 1; params = {a, b}
};

std::string to_string(ValuationFamily family);
ValuationFamily valuation_family_from_string(const std::string& name);

/// Distribution F of private valuations with compact support inside [0, v_bar].
/// Immutable once constructed.
class ValuationModel {
 public:
  ValuationModel(ValuationFamily family, double v_bar, std::vector<double> params = {});

  static ValuationModel uniform_on_fee_to_max(double pi, double v_bar);
  static ValuationModel uniform_on_zero_to_max(double v_bar);
  static ValuationModel truncated_exponential(double rate, double v_bar);
  static ValuationModel scaled_beta(double a, double b, double v_bar);

  ValuationFamily family() const { return family_; }
  double v_bar() const { return v_bar_; }
  const std::vector<double>& params() const { return params_; }
  // Infimum of the support (pi for UniformOnFeeToMax, else 0).
  double lower_support() const;

  double cdf(double v) const;
  double density(double v) const;
  double quantile(double p) const;
  // 1 - F(v) without cancellation near the top of the support.
  double survival(double v) const;

  double sample(RandomStream& stream) const { return quantile(stream.uniform()); }

  /// True when f(v) <= 1/(v_bar - pi) on the top `fraction` of the support.
  /// Families violating this are allowed but fall outside the "approached
  /// from below" limit results.
  bool upper_tail_compliant(double pi, double fraction = 0.05, int grid = 256) const;

 private:
  ValuationFamily family_;
  double v_bar_;
  std::vector<double> params_;
};

/// Valuation model and noise mass as functions of block time T.
struct BlockTimeFamily {
  std::function<double(double)> v_bar_of_T;
  std::function<double(double)> N_of_T;
  std::function<ValuationModel(double)> F_of_T;
  double T0 = 12.0;
  std::vector<double> params;
};

struct DefaultBlockTimeParams {
  double v_bar0 = 0.95;  // v_bar(T0) = 2 * v_bar0
  double T0 = 12.0;      // seconds
  double N0 = 1000.0;
  double lambda = 0.01;  // noise decay per second
};

/// v_bar(T) = v_bar0 (1 + sqrt(T / T0)), N(T) = N0 exp(-lambda T),
/// F(.; T) uniform on [pi, v_bar(T)].
BlockTimeFamily default_block_time_family(double pi, const DefaultBlockTimeParams& p = {});

struct FosdResult {
  bool dominates = false;
  std::optional<double> violating_v;  // first grid point where F(v;T') >= F(v;T)
};

/// Strict first-order stochastic dominance of F(.;T') over F(.;T), scanned on
/// grid_size points of (lower_support(T), v_bar(T)].
FosdResult fosd_check(const BlockTimeFamily& family, double T, double T_prime, int grid_size);

}  // namespace pgamarket
