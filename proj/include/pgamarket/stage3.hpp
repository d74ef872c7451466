#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "pgamarket/numerics.hpp"
#include "pgamarket/valuations.hpp"

namespace pgamarket {

/// Stage-three equilibrium of the priority gas auction for fixed M and pi.
///
/// All schedules are depth-normalised: the volume of a trader with valuation
/// v is L * q_tilde(v) and her priority fee is L * phi_per_depth(v).
/// Cheap to copy; the solved state is shared and immutable.
class Stage3Solution {
 public:
  static Stage3Solution solve(const ValuationModel& model, int M, double pi,
                              const numerics::Tolerance& tol = {});

  int M() const;
  double pi() const;
  const ValuationModel& model() const;
  double cutoff() const;

  /// Volume per unit depth. Zero below the cutoff, (v_bar - pi)/2 at v_bar.
  double q_tilde(double v) const;
  /// Right-hand side of the volume ODE, 1/2 + (M-1) q_tilde(v) f(v).
  double q_tilde_slope(double v) const;
  /// Priority fee per unit depth, 2 (M-1) * integral of q_tilde^2 dF from the cutoff to v.
  double phi_per_depth(double v) const;

  double q_tilde_max() const;
  double phi_per_depth_max() const;

  /// Integral of q_tilde dF over [max(v, cutoff), v_bar].
  double volume_mean_above(double v) const;
  /// Integral of q_tilde dF over [cutoff, v_bar], by quadrature.
  double volume_mean() const;
  /// Integral of q_tilde^2 dF over [cutoff, v_bar].
  double volume_second_moment() const;

  /// Integral of g(v, q_tilde(v)) dF(v) over [a, b] intersected with
  /// [cutoff, v_bar], split at the internal panel nodes.
  double integrate_dF(const std::function<double(double, double)>& g, double a, double b) const;

  /// Valuation whose per-depth fee equals phi (generalised inverse):
  /// phi <= 0 maps to the cutoff, phi >= phi_per_depth_max() to v_bar.
  double valuation_for_fee(double phi_per_depth) const;
  /// Valuation whose per-depth volume equals qt, for qt in (0, q_tilde_max()].
  double valuation_for_volume(double qt) const;

  const numerics::Tolerance& tolerance() const;

 private:
  struct State;
  explicit Stage3Solution(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  std::shared_ptr<const State> state_;
};

/// Participation cutoff: root of
///   (v_bar - pi) - integral_v^{v_bar} exp((M-1)(1-F(u))) du = 0,
/// which is increasing in v; overflowed evaluations are reported as -inf.
double solve_cutoff(const ValuationModel& model, int M, double pi,
                    const numerics::Tolerance& tol = {});

/// Residual of the cutoff equation in its original form
/// v - pi - integral_v^{v_bar} (exp((M-1)(1-F(u))) - 1) du.
double cutoff_residual(const ValuationModel& model, int M, double pi, double v);

double volume_tilde(const Stage3Solution& sol, double v);

/// Distribution G of a competitor's volume, possibly with an atom at zero.
class VolumeDistribution {
 public:
  virtual ~VolumeDistribution() = default;
  virtual double atom_at_zero() const = 0;
  virtual double max_volume() const = 0;
  virtual double cdf(double x) const = 0;
  /// Integral of x^k dG(x) over (0, q].
  virtual double partial_moment(int k, double q) const = 0;
};

/// Finite set of volumes with probabilities; zero volumes form the atom.
class DiscreteVolumeDistribution final : public VolumeDistribution {
 public:
  explicit DiscreteVolumeDistribution(std::vector<std::pair<double, double>> atoms);
  double atom_at_zero() const override;
  double max_volume() const override;
  double cdf(double x) const override;
  double partial_moment(int k, double q) const override;

 private:
  std::vector<std::pair<double, double>> atoms_;  // sorted by volume
};

/// Equilibrium volume distribution: G({0}) = F(cutoff), G(Q(v)) = F(v).
class EquilibriumVolumeDistribution final : public VolumeDistribution {
 public:
  EquilibriumVolumeDistribution(Stage3Solution sol, double depth);
  double atom_at_zero() const override;
  double max_volume() const override;
  double cdf(double x) const override;
  double partial_moment(int k, double q) const override;
  double quantile(double p) const;

 private:
  Stage3Solution sol_;
  double depth_;
};

EquilibriumVolumeDistribution volume_distribution(const Stage3Solution& sol, double depth);

/// Priority fee for an arbitrary volume distribution:
/// (2/L)(M-1) * integral_0^q x^2 dG(x).
double fee_schedule_given_G(const VolumeDistribution& dist, double depth, int M, double q);

/// Equilibrium fee with strategic volumes, L * phi_per_depth(v).
double fee_equilibrium(const Stage3Solution& sol, double depth, double v);

/// L M * integral q_tilde dF by quadrature; throws ConsistencyError if it
/// departs from L M (cutoff - pi) / (2 (M-1)) by more than 1e-8 relative.
double aggregate_volume(const Stage3Solution& sol, double depth);

/// M (cutoff - pi) / (M - 1); independent of depth.
double expected_end_price(const Stage3Solution& sol);

/// |central difference of Q at v - (L/2 + (M-1) Q(v) f(v))|.
double volume_ode_residual(const Stage3Solution& sol, double depth, double v, double h);

/// Expected wealth of a trader with valuation v who submits (q_dev, phi_dev)
/// while the M-1 competitors follow the equilibrium schedules.
double deviation_payoff(const Stage3Solution& sol, double depth, double v, double q_dev,
                        double phi_dev, double C);

}  // namespace pgamarket
