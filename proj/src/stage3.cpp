#include "pgamarket/stage3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pgamarket/errors.hpp"

namespace pgamarket {

namespace {

using numerics::Tolerance;

constexpr int kPanels = 32;
constexpr Tolerance kOuterTolerance{1e-15, 1e-12, 400};
constexpr Tolerance kInverseTolerance{1e-15, 1e-13, 300};

void check_inputs(const ValuationModel& model, int M, double pi) {
  if (M < 2) throw DomainError("number of informed traders M must be at least 2");
  if (!(pi >= 0.0)) throw DomainError("pi must be nonnegative");
  if (!(pi < model.v_bar())) throw DomainError("pi must be below v_bar");
}

}  // namespace

struct Stage3Solution::State {
  ValuationModel model;
  int M;
  double pi;
  double cutoff;
  Tolerance tol;
  std::vector<double> nodes;     // panel edges on [cutoff, v_bar]
  std::vector<double> qt_nodes;  // q_tilde at the edges
  std::vector<double> cum_q;     // integral of q_tilde dF from the cutoff to each edge
  std::vector<double> cum_q2;    // integral of q_tilde^2 dF from the cutoff to each edge

  double width() const { return model.v_bar() - pi; }

  double q_tilde(double v) const {
    if (!(v > cutoff)) return 0.0;
    if (v >= model.v_bar()) return 0.5 * width();
    const double m1 = static_cast<double>(M - 1);
    const double s_v = model.survival(v);
    const double head = width() * std::exp(-m1 * s_v);
    // F(u) - F(v) = S(v) - S(u) >= 0, so every exponent is <= 0.
    const double tail = numerics::integrate(
        [&](double u) { return std::exp(-m1 * (s_v - model.survival(u))); }, v, model.v_bar(),
        numerics::kInnerTolerance);
    return std::max(0.0, 0.5 * (head - tail));
  }

  double integrate_dF(const std::function<double(double, double)>& g, double a, double b) const {
    a = std::max(a, cutoff);
    b = std::min(b, model.v_bar());
    if (!(a < b)) return 0.0;
    auto integrand = [&](double x) { return g(x, q_tilde(x)) * model.density(x); };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const double lo = std::max(a, nodes[k]);
      const double hi = std::min(b, nodes[k + 1]);
      if (lo < hi) total += numerics::integrate(integrand, lo, hi, kOuterTolerance);
    }
    return total;
  }

  std::size_t panel_of(double v) const {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    std::size_t k = static_cast<std::size_t>(std::distance(nodes.begin(), it));
    k = k == 0 ? 0 : k - 1;
    return std::min(k, nodes.size() - 2);
  }

  // Integral of q_tilde^2 dF from the cutoff to v.
  double second_moment_up_to(double v) const {
    if (!(v > cutoff)) return 0.0;
    if (v >= model.v_bar()) return cum_q2.back();
    const std::size_t k = panel_of(v);
    return cum_q2[k] + integrate_dF([](double, double q) { return q * q; }, nodes[k], v);
  }

  double first_moment_up_to(double v) const {
    if (!(v > cutoff)) return 0.0;
    if (v >= model.v_bar()) return cum_q.back();
    const std::size_t k = panel_of(v);
    return cum_q[k] + integrate_dF([](double, double q) { return q; }, nodes[k], v);
  }
};

Stage3Solution Stage3Solution::solve(const ValuationModel& model, int M, double pi,
                                     const Tolerance& tol) {
  auto state = std::make_shared<State>(State{model, M, pi, solve_cutoff(model, M, pi, tol), tol,
                                             {}, {}, {}, {}});
  const double lo = state->cutoff;
  const double hi = model.v_bar();
  state->nodes.resize(kPanels + 1);
  for (int k = 0; k <= kPanels; ++k) {
    state->nodes[k] = lo + (hi - lo) * static_cast<double>(k) / kPanels;
  }
  state->nodes.back() = hi;

  state->qt_nodes.resize(state->nodes.size());
  state->cum_q.assign(state->nodes.size(), 0.0);
  state->cum_q2.assign(state->nodes.size(), 0.0);
  for (std::size_t k = 0; k < state->nodes.size(); ++k) {
    state->qt_nodes[k] = state->q_tilde(state->nodes[k]);
  }
  for (std::size_t k = 1; k < state->nodes.size(); ++k) {
    const double a = state->nodes[k - 1];
    const double b = state->nodes[k];
    state->cum_q[k] =
        state->cum_q[k - 1] + state->integrate_dF([](double, double q) { return q; }, a, b);
    state->cum_q2[k] =
        state->cum_q2[k - 1] + state->integrate_dF([](double, double q) { return q * q; }, a, b);
  }
  return Stage3Solution(std::move(state));
}

int Stage3Solution::M() const { return state_->M; }
double Stage3Solution::pi() const { return state_->pi; }
const ValuationModel& Stage3Solution::model() const { return state_->model; }
double Stage3Solution::cutoff() const { return state_->cutoff; }
const Tolerance& Stage3Solution::tolerance() const { return state_->tol; }

double Stage3Solution::q_tilde(double v) const { return state_->q_tilde(v); }

double Stage3Solution::q_tilde_slope(double v) const {
  if (!(v > cutoff())) return 0.0;
  return 0.5 + static_cast<double>(M() - 1) * q_tilde(v) * model().density(v);
}

double Stage3Solution::phi_per_depth(double v) const {
  return 2.0 * static_cast<double>(M() - 1) * state_->second_moment_up_to(v);
}

double Stage3Solution::q_tilde_max() const { return 0.5 * state_->width(); }

double Stage3Solution::phi_per_depth_max() const {
  return 2.0 * static_cast<double>(M() - 1) * state_->cum_q2.back();
}

double Stage3Solution::volume_mean_above(double v) const {
  return state_->cum_q.back() - state_->first_moment_up_to(v);
}

double Stage3Solution::volume_mean() const { return state_->cum_q.back(); }

double Stage3Solution::volume_second_moment() const { return state_->cum_q2.back(); }

double Stage3Solution::integrate_dF(const std::function<double(double, double)>& g, double a,
                                    double b) const {
  return state_->integrate_dF(g, a, b);
}

double Stage3Solution::valuation_for_fee(double phi) const {
  if (!(phi > 0.0)) return cutoff();
  if (phi >= phi_per_depth_max()) return model().v_bar();
  const double scale = 2.0 * static_cast<double>(M() - 1);
  const auto& cum = state_->cum_q2;
  const double target = phi / scale;
  auto it = std::upper_bound(cum.begin(), cum.end(), target);
  const std::size_t k = std::min<std::size_t>(
      std::max<std::ptrdiff_t>(std::distance(cum.begin(), it) - 1, 0), cum.size() - 2);
  const double a = state_->nodes[k];
  const double b = state_->nodes[k + 1];
  auto f = [&](double v) {
    return cum[k] + state_->integrate_dF([](double, double q) { return q * q; }, a, v) - target;
  };
  if (f(b) <= 0.0) return b;
  if (f(a) >= 0.0) return a;
  return numerics::find_root(f, {a, b, numerics::Sign::Negative, numerics::Sign::Positive},
                             kInverseTolerance);
}

double Stage3Solution::valuation_for_volume(double qt) const {
  if (!(qt > 0.0)) return cutoff();
  if (qt >= q_tilde_max()) return model().v_bar();
  const auto& qn = state_->qt_nodes;
  auto it = std::upper_bound(qn.begin(), qn.end(), qt);
  const std::size_t k = std::min<std::size_t>(
      std::max<std::ptrdiff_t>(std::distance(qn.begin(), it) - 1, 0), qn.size() - 2);
  const double a = state_->nodes[k];
  const double b = state_->nodes[k + 1];
  auto f = [&](double v) { return state_->q_tilde(v) - qt; };
  if (f(b) <= 0.0) return b;
  if (f(a) >= 0.0) return a;
  return numerics::find_root(f, {a, b, numerics::Sign::Negative, numerics::Sign::Positive},
                             kInverseTolerance);
}

double solve_cutoff(const ValuationModel& model, int M, double pi, const Tolerance& tol) {
  check_inputs(model, M, pi);
  tol.validate();
  const double v_bar = model.v_bar();
  const double width = v_bar - pi;
  const double m1 = static_cast<double>(M - 1);
  auto h = [&](double v) {
    if (v >= v_bar) return width;
    const auto integral = numerics::exp_integral_stable(
        [&](double u) { return m1 * model.survival(u); }, v, v_bar, numerics::kInnerTolerance);
    const double log_integral = integral.log_abs();
    if (log_integral > 700.0) return -std::numeric_limits<double>::infinity();
    return width - std::exp(log_integral);
  };
  // h(pi) < 0 < h(v_bar) = v_bar - pi for any continuous F.
  const numerics::Bracket bracket{pi, v_bar, numerics::Sign::Negative, numerics::Sign::Positive};
  double v = numerics::find_root(h, bracket, tol);
  // Newton polish on the residual itself; h'(v) = exp((M-1)(1-F(v))).
  for (int k = 0; k < 3; ++k) {
    const double r = h(v);
    if (!std::isfinite(r) || std::fabs(r) <= tol.abs_tol) break;
    const double next = v - r / std::exp(m1 * model.survival(v));
    if (!(next > pi && next < v_bar)) break;
    v = next;
  }
  return v;
}

double cutoff_residual(const ValuationModel& model, int M, double pi, double v) {
  check_inputs(model, M, pi);
  const double m1 = static_cast<double>(M - 1);
  const double excess = numerics::integrate(
      [&](double u) { return std::expm1(m1 * model.survival(u)); }, v, model.v_bar(),
      numerics::kInnerTolerance);
  return v - pi - excess;
}

double volume_tilde(const Stage3Solution& sol, double v) { return sol.q_tilde(v); }

DiscreteVolumeDistribution::DiscreteVolumeDistribution(
    std::vector<std::pair<double, double>> atoms)
    : atoms_(std::move(atoms)) {
  double total = 0.0;
  for (const auto& [x, p] : atoms_) {
    if (!(x >= 0.0) || !(p >= 0.0)) throw DomainError("volumes and probabilities must be >= 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw DomainError("probabilities must sum to one");
  std::sort(atoms_.begin(), atoms_.end());
}

double DiscreteVolumeDistribution::atom_at_zero() const {
  double p0 = 0.0;
  for (const auto& [x, p] : atoms_) {
    if (x == 0.0) p0 += p;
  }
  return p0;
}

double DiscreteVolumeDistribution::max_volume() const {
  return atoms_.empty() ? 0.0 : atoms_.back().first;
}

double DiscreteVolumeDistribution::cdf(double x) const {
  double c = 0.0;
  for (const auto& [xi, p] : atoms_) {
    if (xi <= x) c += p;
  }
  return c;
}

double DiscreteVolumeDistribution::partial_moment(int k, double q) const {
  double m = 0.0;
  for (const auto& [x, p] : atoms_) {
    if (x > 0.0 && x <= q) m += std::pow(x, k) * p;
  }
  return m;
}

EquilibriumVolumeDistribution::EquilibriumVolumeDistribution(Stage3Solution sol, double depth)
    : sol_(std::move(sol)), depth_(depth) {
  if (!(depth_ > 0.0)) throw DomainError("depth must be positive");
}

double EquilibriumVolumeDistribution::atom_at_zero() const {
  return sol_.model().cdf(sol_.cutoff());
}

double EquilibriumVolumeDistribution::max_volume() const { return depth_ * sol_.q_tilde_max(); }

double EquilibriumVolumeDistribution::cdf(double x) const {
  if (x < 0.0) return 0.0;
  if (x >= max_volume()) return 1.0;
  return sol_.model().cdf(sol_.valuation_for_volume(x / depth_));
}

double EquilibriumVolumeDistribution::partial_moment(int k, double q) const {
  if (!(q > 0.0)) return 0.0;
  const double v_q = sol_.valuation_for_volume(q / depth_);
  const double scale = std::pow(depth_, k);
  if (k == 1) return scale * (sol_.volume_mean() - sol_.volume_mean_above(v_q));
  if (k == 2) return scale * sol_.phi_per_depth(v_q) / (2.0 * static_cast<double>(sol_.M() - 1));
  return scale * sol_.integrate_dF([k](double, double qt) { return std::pow(qt, k); },
                                   sol_.cutoff(), v_q);
}

double EquilibriumVolumeDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0, 1]");
  if (p <= atom_at_zero()) return 0.0;
  return depth_ * sol_.q_tilde(sol_.model().quantile(p));
}

EquilibriumVolumeDistribution volume_distribution(const Stage3Solution& sol, double depth) {
  return EquilibriumVolumeDistribution(sol, depth);
}

double fee_schedule_given_G(const VolumeDistribution& dist, double depth, int M, double q) {
  if (!(q >= 0.0)) throw DomainError("volume q must be nonnegative");
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  if (M < 2) throw DomainError("M must be at least 2");
  return 2.0 / depth * static_cast<double>(M - 1) * dist.partial_moment(2, q);
}

double fee_equilibrium(const Stage3Solution& sol, double depth, double v) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  return depth * sol.phi_per_depth(v);
}

double aggregate_volume(const Stage3Solution& sol, double depth) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  const double M = static_cast<double>(sol.M());
  const double quadrature = depth * M * sol.volume_mean();
  const double closed = depth * M * (sol.cutoff() - sol.pi()) / (2.0 * (M - 1.0));
  if (std::fabs(quadrature - closed) > 1e-8 * std::fabs(closed)) {
    std::ostringstream os;
    os.precision(12);
    os << "aggregate volume quadrature " << quadrature << " disagrees with closed form "
       << closed;
    throw ConsistencyError(os.str());
  }
  return quadrature;
}

double expected_end_price(const Stage3Solution& sol) {
  const double M = static_cast<double>(sol.M());
  return M * (sol.cutoff() - sol.pi()) / (M - 1.0);
}

double volume_ode_residual(const Stage3Solution& sol, double depth, double v, double h) {
  if (!(h > 0.0)) throw DomainError("step h must be positive");
  if (!(sol.cutoff() < v - h && v + h < sol.model().v_bar())) {
    throw DomainError("finite-difference stencil must lie inside (cutoff, v_bar)");
  }
  const double q_plus = depth * sol.q_tilde(v + h);
  const double q_minus = depth * sol.q_tilde(v - h);
  const double slope = (q_plus - q_minus) / (2.0 * h);
  const double rhs = 0.5 * depth + static_cast<double>(sol.M() - 1) * depth * sol.q_tilde(v) *
                                       sol.model().density(v);
  return std::fabs(slope - rhs);
}

double deviation_payoff(const Stage3Solution& sol, double depth, double v, double q_dev,
                        double phi_dev, double C) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  if (!(q_dev >= 0.0) || !(phi_dev >= 0.0)) {
    throw DomainError("deviation volume and fee must be nonnegative");
  }
  // Per-depth volume of the competitors queued ahead of the deviator.
  double ahead;
  if (phi_dev <= 0.0) {
    ahead = sol.volume_mean();
  } else if (phi_dev / depth >= sol.phi_per_depth_max()) {
    ahead = 0.0;
  } else {
    ahead = sol.volume_mean_above(sol.valuation_for_fee(phi_dev / depth));
  }
  return -phi_dev + q_dev * (v - sol.pi() - q_dev / depth) - C -
         2.0 * q_dev * static_cast<double>(sol.M() - 1) * ahead;
}

}  // namespace pgamarket
