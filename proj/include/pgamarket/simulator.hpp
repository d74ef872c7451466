#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "pgamarket/random.hpp"
#include "pgamarket/stage2.hpp"
#include "pgamarket/stage3.hpp"

namespace pgamarket {

/// Cubic Hermite tables of q_tilde and phi_per_depth on [cutoff, v_bar]; node
/// slopes come from the volume ODE and from 2 (M-1) q^2 f.
class ScheduleTable {
 public:
  explicit ScheduleTable(const Stage3Solution& sol, int intervals = 4096);

  double q_tilde(double v) const;
  double phi_per_depth(double v) const;
  double cutoff() const { return lo_; }
  double v_bar() const { return hi_; }

 private:
  double eval(const std::vector<double>& y, const std::vector<double>& dy, double v) const;

  double lo_;
  double hi_;
  double step_;
  std::vector<double> q_, dq_, phi_, dphi_;
};

enum class DexMode { LinearSchedule, ExactConstantProduct };
enum class Side { Buy, Sell };

/// Pool state within one block. Prices are relative to the slot-start price,
/// which the exact curve normalises to 1.
class DexState {
 public:
  DexState(double depth, double pi, DexMode mode);

  /// Executes signed volume q (positive buys); returns the cash the trader
  /// pays net of q times the slot-start price, DEX fee included.
  double execute(double q);

  double depth() const { return depth_; }
  double price() const;
  DexMode mode() const { return mode_; }
  double cash_reserve() const { return x_; }
  double asset_reserve() const { return y_; }

 private:
  double depth_;
  double pi_;
  DexMode mode_;
  double price_ = 0.0;  // linear mode
  double y_ = 0.0;      // exact mode reserves
  double x_ = 0.0;
  double k_ = 0.0;
};

struct TraderRecord {
  int trader_id = 0;
  double v = 0.0;       // signed per-unit terminal value
  double volume = 0.0;  // signed
  double fee = 0.0;
  int queue_rank = 0;   // 1-based
  double exec_price = 0.0;
  double cash_paid = 0.0;
  double wealth = 0.0;
};

struct BlockRealization {
  Side side = Side::Buy;
  std::vector<TraderRecord> traders;  // in queue order
  double delta = 0.0;
  double end_price = 0.0;
  double lp_wealth_change = 0.0;
  double lp_cash_change = 0.0;  // cash the pool received, fees included
  double noise_volume = 0.0;
  int fee_ties = 0;
};

struct SimOptions {
  DexMode mode = DexMode::LinearSchedule;
  double noise_size = 0.0;  // > 0 executes a two-point noise order after informed flow
  int table_intervals = 4096;
};

BlockRealization simulate_block(const Stage3Solution& sol, const ScheduleTable& table,
                                double depth, double y0, double C, RandomStream& stream,
                                const SimOptions& options = {});

BlockRealization simulate_block(const Stage3Solution& sol, double depth, double y0, double C,
                                RandomStream& stream, const SimOptions& options = {});

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct RankVolume {
  int rank = 0;
  double mean_volume = 0.0;
  std::uint64_t count = 0;
};

struct SimReport {
  std::uint64_t n_blocks = 0;
  std::uint64_t seed = 0;
  std::map<std::string, Estimate> estimates;
  std::vector<RankVolume> rank_volume_profile;  // ranks with at least kMinRankSamples entries
  std::uint64_t fee_ties = 0;

  static constexpr std::uint64_t kMinRankSamples = 100;
};

/// Replication r draws from RandomStream(seed, r). Replications are grouped in
/// fixed chunks merged in chunk order, so the report does not depend on `workers`.
SimReport run_monte_carlo(const Stage3Solution& sol, double depth, const MarketParams& params,
                          std::uint64_t n_blocks, std::uint64_t seed, int workers = 1,
                          double y0 = -1.0, const SimOptions& options = {});

/// CSV rows (block_id, trader_id, v, Q, fee, rank, exec_price, W) for the
/// first n_blocks replications of the same streams run_monte_carlo uses.
void write_trace(std::ostream& out, const Stage3Solution& sol, double depth,
                 const MarketParams& params, std::uint64_t n_blocks, std::uint64_t seed,
                 double y0 = -1.0, const SimOptions& options = {});

struct RankMonotonicity {
  double correlation = 0.0;  // Spearman, queue position against mean volume
  bool strictly_decreasing = false;
  int ranks = 0;
};

RankMonotonicity rank_volume_monotonicity(const SimReport& report);

struct DeviationGrid {
  int q_points = 21;
  int phi_points = 21;
  double max_multiple = 2.0;  // grids span [0, max_multiple] times the equilibrium values
};

struct DeviationCell {
  double q = 0.0;
  double phi = 0.0;
  Estimate payoff;
  Estimate gain_over_equilibrium;  // paired difference
  double analytic = 0.0;
};

struct BestResponseVerdict {
  bool passed = false;
  bool equilibrium_is_max = false;
  bool analytic_agrees = false;
  int best_q_index = 0;
  int best_phi_index = 0;
  double max_gain = 0.0;
  double max_gain_se = 0.0;
  double max_analytic_z = 0.0;
  int eq_q_index = 0;
  int eq_phi_index = 0;
  std::vector<DeviationCell> cells;  // row-major in (q, phi)
};

/// Monte Carlo expected wealth of a trader at valuation v over a grid of
/// deviations, with M-1 competitors on equilibrium schedules and common
/// random numbers across the grid.
BestResponseVerdict best_response_scan(const Stage3Solution& sol, double depth,
                                       const MarketParams& params, double v,
                                       const DeviationGrid& grid, std::uint64_t n_samples,
                                       std::uint64_t seed, int workers = 1);

struct AmmErrorRow {
  double q_over_L = 0.0;
  double slippage_rel_error = 0.0;
  double impact_rel_error = 0.0;
};

/// Linear schedule against the constant-product curve k / y calibrated so
/// that 2 / Gamma''(y) equals depth.
std::vector<AmmErrorRow> amm_approximation_error(double depth, double pi,
                                                 const std::vector<double>& q_over_L_grid);

}  // namespace pgamarket
