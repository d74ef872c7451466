#include "pgamarket/valuations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/beta.hpp>

#include "pgamarket/errors.hpp"

namespace pgamarket {

namespace {

double require_param(const std::vector<double>& params, std::size_t i, const char* name) {
  if (params.size() <= i) {
    throw DomainError(std::string("missing valuation parameter '") + name + "'");
  }
  return params[i];
}

boost::math::beta_distribution<double> beta_of(const std::vector<double>& params) {
  return boost::math::beta_distribution<double>(params[0], params[1]);
}

}  // namespace

std::string to_string(ValuationFamily family) {
  switch (family) {
    case ValuationFamily::UniformOnFeeToMax: return "uniform_fee_to_max";
    case ValuationFamily::UniformOnZeroToMax: return "uniform_zero_to_max";
    case ValuationFamily::TruncatedExponential: return "truncated_exponential";
    case ValuationFamily::ScaledBeta: return "scaled_beta";
  }
  return "unknown";
}

ValuationFamily valuation_family_from_string(const std::string& name) {
  for (auto f : {ValuationFamily::UniformOnFeeToMax, ValuationFamily::UniformOnZeroToMax,
                 ValuationFamily::TruncatedExponential, ValuationFamily::ScaledBeta}) {
    if (to_string(f) == name) return f;
  }
  throw DomainError("unknown valuation family '" + name + "'");
}

ValuationModel::ValuationModel(ValuationFamily family, double v_bar, std::vector<double> params)
    : family_(family), v_bar_(v_bar), params_(std::move(params)) {
  if (!(v_bar_ > 0.0) || !std::isfinite(v_bar_)) {
    throw DomainError("v_bar must be positive and finite");
  }
  switch (family_) {
    case ValuationFamily::UniformOnFeeToMax: {
      const double pi = require_param(params_, 0, "pi");
      if (!(pi >= 0.0)) throw DomainError("pi must be nonnegative");
      // A zero-width support would put all mass at v_bar.
      if (!(pi < v_bar_)) throw DomainError("pi must be below v_bar");
      params_.resize(1);
      break;
    }
    case ValuationFamily::UniformOnZeroToMax:
      params_.clear();
      break;
    case ValuationFamily::TruncatedExponential: {
      const double rate = require_param(params_, 0, "rate");
      if (!std::isfinite(rate)) throw DomainError("rate must be finite");
      params_.resize(1);
      break;
    }
    case ValuationFamily::ScaledBeta: {
      const double a = require_param(params_, 0, "alpha");
      const double b = require_param(params_, 1, "beta");
      // a, b >= 1 keeps the density continuous and bounded.
      if (!(a >= 1.0 && b >= 1.0)) throw DomainError("scaled_beta requires alpha, beta >= 1");
      params_.resize(2);
      break;
    }
  }
}

ValuationModel ValuationModel::uniform_on_fee_to_max(double pi, double v_bar) {
  return ValuationModel(ValuationFamily::UniformOnFeeToMax, v_bar, {pi});
}

ValuationModel ValuationModel::uniform_on_zero_to_max(double v_bar) {
  return ValuationModel(ValuationFamily::UniformOnZeroToMax, v_bar);
}

ValuationModel ValuationModel::truncated_exponential(double rate, double v_bar) {
  return ValuationModel(ValuationFamily::TruncatedExponential, v_bar, {rate});
}

ValuationModel ValuationModel::scaled_beta(double a, double b, double v_bar) {
  return ValuationModel(ValuationFamily::ScaledBeta, v_bar, {a, b});
}

double ValuationModel::lower_support() const {
  return family_ == ValuationFamily::UniformOnFeeToMax ? params_[0] : 0.0;
}

double ValuationModel::cdf(double v) const {
  const double lo = lower_support();
  if (!(v > lo)) return 0.0;
  if (v >= v_bar_) return 1.0;
  switch (family_) {
    case ValuationFamily::UniformOnFeeToMax:
    case ValuationFamily::UniformOnZeroToMax:
      return (v - lo) / (v_bar_ - lo);
    case ValuationFamily::TruncatedExponential: {
      const double rate = params_[0];
      if (rate == 0.0) return v / v_bar_;
      return std::expm1(-rate * v) / std::expm1(-rate * v_bar_);
    }
    case ValuationFamily::ScaledBeta:
      return boost::math::cdf(beta_of(params_), v / v_bar_);
  }
  return 0.0;
}

double ValuationModel::survival(double v) const {
  const double lo = lower_support();
  if (!(v > lo)) return 1.0;
  if (v >= v_bar_) return 0.0;
  switch (family_) {
    case ValuationFamily::UniformOnFeeToMax:
    case ValuationFamily::UniformOnZeroToMax:
      return (v_bar_ - v) / (v_bar_ - lo);
    case ValuationFamily::TruncatedExponential: {
      const double rate = params_[0];
      if (rate == 0.0) return (v_bar_ - v) / v_bar_;
      return std::exp(-rate * v) * std::expm1(-rate * (v_bar_ - v)) / std::expm1(-rate * v_bar_);
    }
    case ValuationFamily::ScaledBeta:
      return boost::math::cdf(boost::math::complement(beta_of(params_), v / v_bar_));
  }
  return 0.0;
}

double ValuationModel::density(double v) const {
  const double lo = lower_support();
  if (v < lo || v > v_bar_) return 0.0;
  switch (family_) {
    case ValuationFamily::UniformOnFeeToMax:
    case ValuationFamily::UniformOnZeroToMax:
      return 1.0 / (v_bar_ - lo);
    case ValuationFamily::TruncatedExponential: {
      const double rate = params_[0];
      if (rate == 0.0) return 1.0 / v_bar_;
      return -rate * std::exp(-rate * v) / std::expm1(-rate * v_bar_);
    }
    case ValuationFamily::ScaledBeta:
      return boost::math::pdf(beta_of(params_), v / v_bar_) / v_bar_;
  }
  return 0.0;
}

double ValuationModel::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "quantile probability " << p << " outside [0, 1]";
    throw DomainError(os.str());
  }
  const double lo = lower_support();
  switch (family_) {
    case ValuationFamily::UniformOnFeeToMax:
    case ValuationFamily::UniformOnZeroToMax:
      return lo + p * (v_bar_ - lo);
    case ValuationFamily::TruncatedExponential: {
      const double rate = params_[0];
      if (rate == 0.0) return p * v_bar_;
      const double v = -std::log1p(p * std::expm1(-rate * v_bar_)) / rate;
      return std::clamp(v, 0.0, v_bar_);
    }
    case ValuationFamily::ScaledBeta:
      return v_bar_ * boost::math::quantile(beta_of(params_), p);
  }
  return lo;
}

bool ValuationModel::upper_tail_compliant(double pi, double fraction, int grid) const {
  if (!(pi < v_bar_)) throw DomainError("pi must be below v_bar");
  const double bound = 1.0 / (v_bar_ - pi);
  const double start = v_bar_ - fraction * (v_bar_ - lower_support());
  for (int i = 0; i <= grid; ++i) {
    const double v = start + (v_bar_ - start) * static_cast<double>(i) / grid;
    if (density(v) > bound * (1.0 + 1e-12)) return false;
  }
  return true;
}

BlockTimeFamily default_block_time_family(double pi, const DefaultBlockTimeParams& p) {
  if (!(p.v_bar0 > 0.0 && p.T0 > 0.0 && p.N0 >= 0.0 && p.lambda >= 0.0)) {
    throw DomainError("invalid default block-time parameters");
  }
  BlockTimeFamily family;
  family.T0 = p.T0;
  family.params = {p.v_bar0, p.T0, p.N0, p.lambda};
  family.v_bar_of_T = [p](double T) { return p.v_bar0 * (1.0 + std::sqrt(T / p.T0)); };
  family.N_of_T = [p](double T) { return p.N0 * std::exp(-p.lambda * T); };
  family.F_of_T = [p, pi](double T) {
    return ValuationModel::uniform_on_fee_to_max(pi, p.v_bar0 * (1.0 + std::sqrt(T / p.T0)));
  };
  return family;
}

FosdResult fosd_check(const BlockTimeFamily& family, double T, double T_prime, int grid_size) {
  if (!(T > 0.0)) throw DomainError("block time must be positive");
  if (!(T_prime > T)) throw DomainError("fosd_check requires T' > T");
  if (grid_size < 1) throw DomainError("grid_size must be positive");
  const ValuationModel base = family.F_of_T(T);
  const ValuationModel longer = family.F_of_T(T_prime);
  const double lo = base.lower_support();
  const double hi = family.v_bar_of_T(T);
  for (int k = 1; k <= grid_size; ++k) {
    const double v = lo + (hi - lo) * static_cast<double>(k) / grid_size;
    if (!(longer.cdf(v) < base.cdf(v))) return {false, v};
  }
  return {true, std::nullopt};
}

}  // namespace pgamarket
