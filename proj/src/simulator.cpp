#include "pgamarket/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "pgamarket/errors.hpp"

namespace pgamarket {

namespace {

constexpr std::uint64_t kChunk = 1024;

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double total = na + nb;
    mean += d * nb / total;
    m2 += o.m2 + d * d * na * nb / total;
    n += o.n;
  }

  Estimate estimate() const {
    if (n == 0) return {};
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};

// Runs fn(chunk_index) for every chunk on up to `workers` threads.
template <class Fn>
void for_each_chunk(std::uint64_t n_chunks, int workers, Fn fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n_chunks <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  const auto n_threads = static_cast<std::uint64_t>(workers) < n_chunks
                             ? static_cast<std::uint64_t>(workers)
                             : n_chunks;
  std::vector<std::exception_ptr> errors(n_threads);
  for (std::uint64_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t c = next++; c < n_chunks && !failed; c = next++) fn(c);
      } catch (...) {
        errors[t] = std::current_exception();
        failed = true;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ScheduleTable::ScheduleTable(const Stage3Solution& sol, int intervals)
    : lo_(sol.cutoff()), hi_(sol.model().v_bar()) {
  if (intervals < 1) throw DomainError("table needs at least one interval");
  const auto n = static_cast<std::size_t>(intervals);
  step_ = (hi_ - lo_) / static_cast<double>(intervals);
  const double m1 = static_cast<double>(sol.M() - 1);
  const ValuationModel& model = sol.model();
  q_.resize(n + 1);
  dq_.resize(n + 1);
  phi_.resize(n + 1);
  dphi_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double v = i == n ? hi_ : lo_ + step_ * static_cast<double>(i);
    q_[i] = sol.q_tilde(v);
    const double f = model.density(v);
    dq_[i] = 0.5 + m1 * q_[i] * f;
    dphi_[i] = 2.0 * m1 * q_[i] * q_[i] * f;
    if (i == 0) {
      phi_[i] = 0.0;
    } else {
      const double a = lo_ + step_ * static_cast<double>(i - 1);
      phi_[i] = phi_[i - 1] +
                2.0 * m1 * sol.integrate_dF([](double, double q) { return q * q; }, a, v);
    }
  }
}

double ScheduleTable::eval(const std::vector<double>& y, const std::vector<double>& dy,
                           double v) const {
  if (!(v > lo_)) return 0.0;
  if (v >= hi_) return y.back();
  const double s = (v - lo_) / step_;
  auto i = static_cast<std::size_t>(s);
  if (i >= y.size() - 1) i = y.size() - 2;
  const double t = s - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y[i] + h10 * step_ * dy[i] + h01 * y[i + 1] + h11 * step_ * dy[i + 1];
}

double ScheduleTable::q_tilde(double v) const { return std::max(0.0, eval(q_, dq_, v)); }

double ScheduleTable::phi_per_depth(double v) const {
  return std::max(0.0, eval(phi_, dphi_, v));
}

DexState::DexState(double depth, double pi, DexMode mode) : depth_(depth), pi_(pi), mode_(mode) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  if (mode_ == DexMode::ExactConstantProduct) {
    // Gamma(y) = k / y with Gamma''(y) = 2 / depth and marginal price k / y^2 = 1.
    y_ = depth;
    k_ = depth * depth;
    x_ = k_ / y_;
  }
}

double DexState::price() const {
  if (mode_ == DexMode::LinearSchedule) return price_;
  return k_ / (y_ * y_) - 1.0;
}

double DexState::execute(double q) {
  const double fee = pi_ * std::fabs(q);
  if (mode_ == DexMode::LinearSchedule) {
    const double cash = q * (price_ + q / depth_) + fee;
    price_ += 2.0 * q / depth_;
    return cash;
  }
  if (!(q < y_)) throw DomainError("trade exceeds the pool's asset reserve");
  const double y_new = y_ - q;
  const double x_new = k_ / y_new;
  const double cash = (x_new - x_) - q + fee;
  x_ = x_new;
  y_ = y_new;
  return cash;
}

BlockRealization simulate_block(const Stage3Solution& sol, const ScheduleTable& table,
                                double depth, double y0, double C, RandomStream& stream,
                                const SimOptions& options) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  const int M = sol.M();
  BlockRealization block;
  block.side = stream.uniform() < 0.5 ? Side::Buy : Side::Sell;
  const double sign = block.side == Side::Buy ? 1.0 : -1.0;

  block.traders.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    auto& t = block.traders[static_cast<std::size_t>(i)];
    const double v = sol.model().sample(stream);
    t.trader_id = i;
    t.v = sign * v;
    t.volume = sign * depth * table.q_tilde(v);
    t.fee = depth * table.phi_per_depth(v);
  }
  // Active traders by descending fee, ties by draw index, then the inactive ones.
  std::stable_sort(block.traders.begin(), block.traders.end(),
                   [](const TraderRecord& a, const TraderRecord& b) {
                     const bool aa = a.volume != 0.0;
                     const bool ba = b.volume != 0.0;
                     if (aa != ba) return aa;
                     if (!aa) return false;
                     return a.fee > b.fee;
                   });

  DexState dex(depth, sol.pi(), options.mode);
  for (std::size_t r = 0; r < block.traders.size(); ++r) {
    auto& t = block.traders[r];
    t.queue_rank = static_cast<int>(r) + 1;
    if (t.volume != 0.0) {
      if (r > 0 && block.traders[r - 1].volume != 0.0 && block.traders[r - 1].fee == t.fee) {
        ++block.fee_ties;
      }
      t.cash_paid = dex.execute(t.volume);
      t.exec_price = t.cash_paid / t.volume;
      block.delta += t.volume;
      block.lp_cash_change += t.cash_paid;
    }
    t.wealth = -t.fee - t.cash_paid + t.volume * t.v - C;
  }
  block.end_price =
      options.mode == DexMode::LinearSchedule ? 2.0 * block.delta / depth : dex.price();
  block.lp_wealth_change = lp_wealth_change(depth, block.delta, y0);
  if (options.noise_size > 0.0) {
    block.noise_volume = stream.uniform() < 0.5 ? options.noise_size : -options.noise_size;
    block.lp_cash_change += dex.execute(block.noise_volume);
  }
  return block;
}

BlockRealization simulate_block(const Stage3Solution& sol, double depth, double y0, double C,
                                RandomStream& stream, const SimOptions& options) {
  const ScheduleTable table(sol, options.table_intervals);
  return simulate_block(sol, table, depth, y0, C, stream, options);
}

SimReport run_monte_carlo(const Stage3Solution& sol, double depth, const MarketParams& params,
                          std::uint64_t n_blocks, std::uint64_t seed, int workers, double y0,
                          const SimOptions& options) {
  if (n_blocks < 1) throw DomainError("n_blocks must be at least 1");
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  if (y0 < 0.0) y0 = depth;
  const ScheduleTable table(sol, options.table_intervals);
  const auto M = static_cast<std::size_t>(sol.M());

  struct Chunk {
    Welford end_price, volume, lp_loss, active, participation;
    std::vector<double> rank_sum;
    std::vector<std::uint64_t> rank_count;
    std::uint64_t ties = 0;
  };
  const std::uint64_t n_chunks = (n_blocks + kChunk - 1) / kChunk;
  std::vector<Chunk> chunks(n_chunks);

  for_each_chunk(n_chunks, workers, [&](std::uint64_t c) {
    Chunk& acc = chunks[c];
    acc.rank_sum.assign(M, 0.0);
    acc.rank_count.assign(M, 0);
    const std::uint64_t end = std::min(n_blocks, (c + 1) * kChunk);
    for (std::uint64_t r = c * kChunk; r < end; ++r) {
      RandomStream stream(seed, r);
      const auto block = simulate_block(sol, table, depth, y0, params.C, stream, options);
      const double sign = block.side == Side::Buy ? 1.0 : -1.0;
      int active = 0;
      for (const auto& t : block.traders) {
        if (t.volume == 0.0) continue;
        ++active;
        const auto k = static_cast<std::size_t>(t.queue_rank - 1);
        acc.rank_sum[k] += std::fabs(t.volume);
        ++acc.rank_count[k];
      }
      acc.end_price.add(sign * block.end_price);
      acc.volume.add(std::fabs(block.delta));
      acc.lp_loss.add(block.lp_wealth_change);
      acc.active.add(active);
      acc.participation.add(static_cast<double>(active) / static_cast<double>(M));
      acc.ties += static_cast<std::uint64_t>(block.fee_ties);
    }
  });

  Chunk total;
  total.rank_sum.assign(M, 0.0);
  total.rank_count.assign(M, 0);
  for (const auto& c : chunks) {
    total.end_price.merge(c.end_price);
    total.volume.merge(c.volume);
    total.lp_loss.merge(c.lp_loss);
    total.active.merge(c.active);
    total.participation.merge(c.participation);
    for (std::size_t k = 0; k < M; ++k) {
      total.rank_sum[k] += c.rank_sum[k];
      total.rank_count[k] += c.rank_count[k];
    }
    total.ties += c.ties;
  }

  SimReport report;
  report.n_blocks = n_blocks;
  report.seed = seed;
  report.fee_ties = total.ties;
  report.estimates["end_price"] = total.end_price.estimate();
  report.estimates["aggregate_volume"] = total.volume.estimate();
  report.estimates["lp_loss"] = total.lp_loss.estimate();
  report.estimates["active_count"] = total.active.estimate();
  report.estimates["participation_rate"] = total.participation.estimate();
  for (std::size_t k = 0; k < M; ++k) {
    if (total.rank_count[k] < SimReport::kMinRankSamples) continue;
    report.rank_volume_profile.push_back(
        {static_cast<int>(k) + 1, total.rank_sum[k] / static_cast<double>(total.rank_count[k]),
         total.rank_count[k]});
  }
  return report;
}

void write_trace(std::ostream& out, const Stage3Solution& sol, double depth,
                 const MarketParams& params, std::uint64_t n_blocks, std::uint64_t seed,
                 double y0, const SimOptions& options) {
  if (y0 < 0.0) y0 = depth;
  const ScheduleTable table(sol, options.table_intervals);
  const auto old_precision = out.precision(9);
  out << "block_id,trader_id,v,Q,fee,rank,exec_price,W\n";
  for (std::uint64_t r = 0; r < n_blocks; ++r) {
    RandomStream stream(seed, r);
    const auto block = simulate_block(sol, table, depth, y0, params.C, stream, options);
    for (const auto& t : block.traders) {
      out << r << ',' << t.trader_id << ',' << t.v << ',' << t.volume << ',' << t.fee << ','
          << t.queue_rank << ',' << t.exec_price << ',' << t.wealth << '\n';
    }
  }
  out.precision(old_precision);
}

RankMonotonicity rank_volume_monotonicity(const SimReport& report) {
  const auto& prof = report.rank_volume_profile;
  if (prof.size() < 2) {
    throw InsufficientData("rank profile needs at least two ranks with enough samples");
  }
  const std::size_t n = prof.size();
  // Ranks of the mean volumes (average ranks for ties).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return prof[a].mean_volume < prof[b].mean_volume;
  });
  std::vector<double> vol_rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && prof[order[j + 1]].mean_volume == prof[order[i]].mean_volume) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) vol_rank[order[k]] = avg;
    i = j + 1;
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += static_cast<double>(i + 1);
    my += vol_rank[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - mx;
    const double dy = vol_rank[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  RankMonotonicity out;
  out.ranks = static_cast<int>(n);
  out.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  out.strictly_decreasing = true;
  for (std::size_t i = 1; i < n; ++i) {
    if (!(prof[i].mean_volume < prof[i - 1].mean_volume)) out.strictly_decreasing = false;
  }
  return out;
}

BestResponseVerdict best_response_scan(const Stage3Solution& sol, double depth,
                                       const MarketParams& params, double v,
                                       const DeviationGrid& grid, std::uint64_t n_samples,
                                       std::uint64_t seed, int workers) {
  if (!(v > sol.cutoff() && v <= sol.model().v_bar())) {
    throw DomainError("best-response valuation must lie above the cutoff");
  }
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  if (n_samples < 2) throw DomainError("best-response scan needs at least two samples");
  if (grid.q_points < 2 || grid.phi_points < 2 || !(grid.max_multiple >= 1.0)) {
    throw DomainError("invalid deviation grid");
  }
  const double q_eq_index = (grid.q_points - 1) / grid.max_multiple;
  const double phi_eq_index = (grid.phi_points - 1) / grid.max_multiple;
  if (q_eq_index != std::round(q_eq_index) || phi_eq_index != std::round(phi_eq_index)) {
    throw DomainError("deviation grid must contain the equilibrium point");
  }

  const ScheduleTable table(sol, 4096);
  const int jq = static_cast<int>(q_eq_index);
  const int kp = static_cast<int>(phi_eq_index);
  const double q_eq = depth * sol.q_tilde(v);
  const double phi_eq = depth * sol.phi_per_depth(v);
  std::vector<double> qs(static_cast<std::size_t>(grid.q_points));
  std::vector<double> phis(static_cast<std::size_t>(grid.phi_points));
  for (int j = 0; j < grid.q_points; ++j) qs[j] = q_eq * j / static_cast<double>(jq);
  for (int k = 0; k < grid.phi_points; ++k) phis[k] = phi_eq * k / static_cast<double>(kp);
  qs[jq] = q_eq;
  phis[kp] = phi_eq;

  const std::size_t n_q = qs.size();
  const std::size_t n_phi = phis.size();
  const std::size_t n_cells = n_q * n_phi;
  const std::size_t eq_cell = static_cast<std::size_t>(jq) * n_phi + static_cast<std::size_t>(kp);
  const int competitors = sol.M() - 1;

  struct Chunk {
    std::vector<Welford> payoff, gain;
  };
  const std::uint64_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<Chunk> chunks(n_chunks);
  for_each_chunk(n_chunks, workers, [&](std::uint64_t c) {
    Chunk& acc = chunks[c];
    acc.payoff.assign(n_cells, {});
    acc.gain.assign(n_cells, {});
    std::vector<double> ahead(n_phi);
    std::vector<double> comp_q(static_cast<std::size_t>(competitors));
    std::vector<double> comp_fee(static_cast<std::size_t>(competitors));
    std::vector<double> values(n_cells);
    const std::uint64_t end = std::min(n_samples, (c + 1) * kChunk);
    for (std::uint64_t s = c * kChunk; s < end; ++s) {
      RandomStream stream(seed, s);
      for (int i = 0; i < competitors; ++i) {
        const double u = sol.model().sample(stream);
        comp_q[i] = depth * table.q_tilde(u);
        comp_fee[i] = depth * table.phi_per_depth(u);
      }
      for (std::size_t k = 0; k < n_phi; ++k) {
        double a = 0.0;
        for (int i = 0; i < competitors; ++i) {
          if (comp_q[i] > 0.0 && comp_fee[i] > phis[k]) a += comp_q[i];
        }
        ahead[k] = a;
      }
      for (std::size_t j = 0; j < n_q; ++j) {
        const double q = qs[j];
        const double base = q * (v - sol.pi() - q / depth) - params.C;
        for (std::size_t k = 0; k < n_phi; ++k) {
          values[j * n_phi + k] = base - phis[k] - 2.0 * q / depth * ahead[k];
        }
      }
      const double at_eq = values[eq_cell];
      for (std::size_t cell = 0; cell < n_cells; ++cell) {
        acc.payoff[cell].add(values[cell]);
        acc.gain[cell].add(values[cell] - at_eq);
      }
    }
  });

  std::vector<Welford> payoff(n_cells);
  std::vector<Welford> gain(n_cells);
  for (const auto& c : chunks) {
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      payoff[cell].merge(c.payoff[cell]);
      gain[cell].merge(c.gain[cell]);
    }
  }

  BestResponseVerdict out;
  out.eq_q_index = jq;
  out.eq_phi_index = kp;
  out.cells.resize(n_cells);
  std::size_t best = eq_cell;
  double worst_z = 0.0;
  out.analytic_agrees = true;
  for (std::size_t j = 0; j < n_q; ++j) {
    for (std::size_t k = 0; k < n_phi; ++k) {
      const std::size_t cell = j * n_phi + k;
      auto& dc = out.cells[cell];
      dc.q = qs[j];
      dc.phi = phis[k];
      dc.payoff = payoff[cell].estimate();
      dc.gain_over_equilibrium = gain[cell].estimate();
      dc.analytic = deviation_payoff(sol, depth, v, qs[j], phis[k], params.C);
      const double slack = 1e-9 * (1.0 + std::fabs(dc.analytic));
      const double diff = std::fabs(dc.payoff.mean - dc.analytic);
      if (diff > 3.0 * dc.payoff.std_error + slack) out.analytic_agrees = false;
      if (dc.payoff.std_error > 0.0) worst_z = std::max(worst_z, diff / dc.payoff.std_error);
      // The equilibrium cell's gain is zero by construction.
      if (dc.gain_over_equilibrium.mean > out.cells[best].gain_over_equilibrium.mean) best = cell;
    }
  }
  out.max_analytic_z = worst_z;
  out.best_q_index = static_cast<int>(best / n_phi);
  out.best_phi_index = static_cast<int>(best % n_phi);
  out.max_gain = out.cells[best].gain_over_equilibrium.mean;
  out.max_gain_se = out.cells[best].gain_over_equilibrium.std_error;
  const double slack = 1e-9 * (1.0 + std::fabs(out.cells[eq_cell].payoff.mean));
  out.equilibrium_is_max = out.max_gain <= 3.0 * out.max_gain_se + slack;
  out.passed = out.equilibrium_is_max && out.analytic_agrees;
  return out;
}

std::vector<AmmErrorRow> amm_approximation_error(double depth, double pi,
                                                 const std::vector<double>& q_over_L_grid) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive");
  std::vector<AmmErrorRow> rows;
  rows.reserve(q_over_L_grid.size());
  for (double x : q_over_L_grid) {
    if (!(x > 0.0 && x < 0.5)) throw DomainError("q/L grid values must lie in (0, 0.5)");
    const double q = x * depth;
    DexState exact(depth, pi, DexMode::ExactConstantProduct);
    if (!(q < exact.asset_reserve())) throw DomainError("trade exceeds the pool's asset reserve");
    const double slippage = (exact.execute(q) - pi * q) / q;
    const double impact = exact.price();
    rows.push_back({x, std::fabs(x - slippage) / slippage, std::fabs(2.0 * x - impact) / impact});
  }
  return rows;
}

}  // namespace pgamarket
