#include "pgamarket/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "pgamarket/blocktime.hpp"
#include "pgamarket/cli/config.hpp"
#include "pgamarket/cli/report.hpp"
#include "pgamarket/cli/verify.hpp"
#include "pgamarket/errors.hpp"
#include "pgamarket/simulator.hpp"
#include "pgamarket/stage1.hpp"

namespace pgamarket::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<int> M;
  std::optional<std::string> M_range;
  std::optional<std::string> T_grid;
  std::optional<std::string> C;
  std::optional<std::string> N;
  std::optional<std::uint64_t> n_blocks;
  std::optional<std::string> trace;
};

RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  if (f.format) cfg.format = *f.format;
  if (f.out) cfg.out = *f.out;
  if (f.M) cfg.M = *f.M;
  if (f.M_range) {
    const auto sep = f.M_range->find_first_of(":-");
    try {
      if (sep == std::string::npos) throw std::invalid_argument("separator");
      cfg.M_range = {std::stoi(f.M_range->substr(0, sep)), std::stoi(f.M_range->substr(sep + 1))};
    } catch (const std::exception&) {
      throw ConfigError("--M-range: expected LO:HI, got '" + *f.M_range + "'");
    }
  }
  if (f.T_grid) cfg.T_grid = parse_list(*f.T_grid, "--T-grid");
  if (f.C) cfg.C = parse_list(*f.C, "--C");
  if (f.N) cfg.N = parse_list(*f.N, "--N");
  if (f.n_blocks) cfg.n_blocks = *f.n_blocks;
  if (f.trace) cfg.trace = *f.trace;
  if (cfg.format != "json" && cfg.format != "csv") throw ConfigError("--format must be json or csv");
  if (cfg.workers < 1) throw ConfigError("--workers must be at least 1");
  if (cfg.M && *cfg.M < 2) throw ConfigError("M must be at least 2");
  if (cfg.M_range && !(cfg.M_range->first >= 2 && cfg.M_range->second >= cfg.M_range->first)) {
    throw ConfigError("M_range must satisfy 2 <= lo <= hi");
  }
  return cfg;
}

double single(const std::vector<double>& xs, const char* name) {
  if (xs.size() != 1) {
    throw ConfigError(std::string("'") + name + "' lists several values; only sweep accepts a list");
  }
  return xs.front();
}

double scalar_C(const RunConfig& cfg) { return cfg.C.empty() ? 0.0 : single(cfg.C, "C"); }

std::uint64_t resolve_seed(RunConfig& cfg, std::ostream& err) {
  if (!cfg.seed) {
    std::random_device rd;
    cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << *cfg.seed << "\n";
  }
  return *cfg.seed;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out) {
    std::ofstream f(*cfg.out);
    if (!f) throw ConfigError("cannot write to '" + *cfg.out + "'");
    f << text;
  } else {
    out << text;
  }
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

// Solved quantities at one (params, M).
struct Point {
  Stage3Solution sol;
  MarketEquilibrium eq;
  double H;
};

Point solve_point(const MarketParams& params, int M) {
  auto sol = Stage3Solution::solve(params.model, M, params.pi);
  auto eq = liquidity_star(params, sol);
  const double H = h_of_m(params, M);
  return {std::move(sol), eq, H};
}

int cmd_solve(RunConfig cfg, std::ostream& out) {
  if (!cfg.M && cfg.C.empty()) throw ConfigError("solve needs M or C");
  const double C = scalar_C(cfg);
  const auto params = build_params(cfg, single(cfg.N, "N"), C);

  std::optional<EntryOutcome> entry;
  if (!cfg.C.empty()) entry = equilibrium_m(params, cfg.m_cap, cfg.workers);
  const int M = cfg.M ? *cfg.M : (entry && entry->m_star ? *entry->m_star : 2);
  const Point p = solve_point(params, M);

  ojson j;
  j["command"] = "solve";
  j["config"] = config_to_json(cfg);
  j["M"] = M;
  j["cutoff"] = num(p.sol.cutoff());
  j["s_M"] = num(p.eq.s_M);
  j["L_star"] = num(p.eq.L_star);
  j["viable"] = p.eq.viable;
  j["shutdown"] = p.eq.shutdown;
  j["liquidity_limit"] = num(liquidity_limit(params));
  j["H"] = num(p.H);
  j["aggregate_volume"] = num(p.eq.aggregate_volume);
  j["end_price"] = num(p.eq.end_price);
  j["active_count"] = num(M * params.model.survival(p.sol.cutoff()));

  std::vector<std::vector<double>> schedule;
  ojson sched = ojson::array();
  const double lo = p.sol.cutoff();
  const double hi = params.model.v_bar();
  for (int i = 0; i < cfg.grid_points; ++i) {
    const double v = lo + (hi - lo) * i / (cfg.grid_points - 1.0);
    const double qt = p.sol.q_tilde(v);
    const double phi = p.sol.phi_per_depth(v);
    const double L = p.eq.viable ? p.eq.L_star : std::nan("");
    schedule.push_back({v, qt, L * qt, L * phi});
    sched.push_back({{"v", num(v)}, {"q_tilde", num(qt)}, {"Q", num(L * qt)}, {"fee", num(L * phi)}});
  }
  j["schedule"] = sched;
  if (entry) {
    ojson e;
    e["C"] = num(C);
    e["m_star"] = entry->m_star ? ojson(*entry->m_star) : ojson(nullptr);
    e["binding"] = entry->binding;
    e["scanned_to"] = entry->scanned_to;
    e["m_cap"] = entry->m_cap;
    j["entry"] = e;
  }

  if (cfg.format == "json") {
    emit(cfg, dump(j), out);
  } else {
    std::ostringstream os;
    os << "v,q_tilde,Q,fee\n";
    for (const auto& row : schedule) {
      os << fmt(row[0]) << ',' << fmt(row[1]) << ',' << fmt(row[2]) << ',' << fmt(row[3]) << '\n';
    }
    os << "# M=" << M << " cutoff=" << fmt(p.sol.cutoff()) << " s_M=" << fmt(p.eq.s_M)
       << " L_star=" << fmt(p.eq.L_star) << " viable=" << (p.eq.viable ? "true" : "false")
       << " H=" << fmt(p.H) << " aggregate_volume=" << fmt(p.eq.aggregate_volume)
       << " end_price=" << fmt(p.eq.end_price);
    if (entry) {
      os << " m_star=" << (entry->m_star ? std::to_string(*entry->m_star) : "none");
    }
    os << '\n';
    emit(cfg, os.str(), out);
  }
  return p.eq.viable ? kOk : kNotViable;
}

int cmd_sweep(RunConfig cfg, std::ostream& out) {
  std::vector<std::string> axes;
  if (cfg.M_range) axes.push_back("M");
  if (!cfg.T_grid.empty()) axes.push_back("T");
  if (cfg.C.size() >= 2) axes.push_back("C");
  if (cfg.N.size() >= 2) axes.push_back("N");
  if (axes.size() != 1) {
    std::string got;
    for (const auto& a : axes) got += (got.empty() ? "" : ", ") + a;
    throw ConfigError("sweep needs exactly one axis among M, T, C, N; got " +
                      (got.empty() ? std::string("none") : got));
  }
  const std::string axis = axes.front();
  const int M = cfg.M.value_or(2);

  std::vector<std::string> columns = {axis,  "cutoff", "aggregate_volume", "end_price",
                                      "s_M", "L_star", "H",                "viable"};
  if (axis == "T") {
    columns.insert(columns.end(), {"v_bar", "N", "L_inf"});
  }
  if (axis == "C" || axis == "N") columns.push_back("m_star");
  std::vector<std::vector<double>> rows;

  auto base_row = [&](double x, const MarketParams& params, int m) {
    const Point p = solve_point(params, m);
    return std::vector<double>{x,         p.sol.cutoff(), p.eq.aggregate_volume, p.eq.end_price,
                               p.eq.s_M,  p.eq.L_star,    p.H,
                               p.eq.viable ? 1.0 : 0.0};
  };
  auto m_star_value = [](const std::optional<int>& m) {
    return m ? static_cast<double>(*m) : std::nan("");
  };

  if (axis == "M") {
    const auto params = build_params(cfg, single(cfg.N, "N"), scalar_C(cfg));
    for (int m = cfg.M_range->first; m <= cfg.M_range->second; ++m) {
      rows.push_back(base_row(m, params, m));
    }
  } else if (axis == "T") {
    const auto family = build_block_time_family(cfg);
    for (std::size_t i = 0; i < cfg.T_grid.size(); ++i) {
      if (!(cfg.T_grid[i] > 0.0) || (i > 0 && !(cfg.T_grid[i] > cfg.T_grid[i - 1]))) {
        throw ConfigError("T_grid must be positive and strictly increasing");
      }
    }
    for (double T : cfg.T_grid) {
      MarketParams params;
      params.pi = cfg.pi;
      params.theta = cfg.theta;
      params.N = family.N_of_T(T);
      params.C = scalar_C(cfg);
      params.model = family.F_of_T(T);
      auto row = base_row(T, params, M);
      row.push_back(family.v_bar_of_T(T));
      row.push_back(params.N);
      row.push_back(limit_liquidity_vs_T(family, cfg.pi, cfg.theta, T));
      rows.push_back(row);
    }
  } else if (axis == "C") {
    const auto params = build_params(cfg, single(cfg.N, "N"), *std::min_element(cfg.C.begin(), cfg.C.end()));
    const auto entry = equilibrium_m(params, cfg.m_cap, cfg.workers);
    const auto fixed = base_row(0.0, params, M);
    for (double C : cfg.C) {
      auto row = fixed;
      row[0] = C;
      row.push_back(m_star_value(m_star_from_table(entry.h_values, C)));
      rows.push_back(row);
    }
  } else {
    const double C = scalar_C(cfg);
    for (double N : cfg.N) {
      const auto params = build_params(cfg, N, C);
      auto row = base_row(N, params, M);
      row.push_back(m_star_value(equilibrium_m(params, cfg.m_cap, cfg.workers).m_star));
      rows.push_back(row);
    }
  }

  ojson mono;
  for (std::size_t c = 1; c < columns.size(); ++c) {
    if (columns[c] == "viable") continue;
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r[c]);
    mono[columns[c]] = monotonicity(col);
  }

  if (cfg.format == "csv") {
    std::ostringstream os;
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        os << (c ? "," : "");
        if (columns[c] == "viable") {
          os << (r[c] != 0.0 ? "true" : "false");
        } else if (columns[c] == "m_star" && std::isnan(r[c])) {
          os << "none";
        } else {
          os << fmt(r[c]);
        }
      }
      os << '\n';
    }
    os << "# monotonicity";
    for (const auto& [k, v] : mono.items()) os << ' ' << k << '=' << v.get<std::string>();
    os << '\n';
    emit(cfg, os.str(), out);
  } else {
    ojson j;
    j["command"] = "sweep";
    j["config"] = config_to_json(cfg);
    j["axis"] = axis;
    j["columns"] = columns;
    ojson jr = ojson::array();
    for (const auto& r : rows) {
      ojson row = ojson::array();
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (columns[c] == "viable") {
          row.push_back(r[c] != 0.0);
        } else {
          row.push_back(num(r[c]));
        }
      }
      jr.push_back(row);
    }
    j["rows"] = jr;
    j["monotonicity"] = mono;
    emit(cfg, dump(j), out);
  }
  return kOk;
}

SimOptions sim_options(const RunConfig& cfg) {
  SimOptions o;
  o.mode = cfg.dex_mode == "exact" ? DexMode::ExactConstantProduct : DexMode::LinearSchedule;
  o.noise_size = cfg.noise_size;
  return o;
}

int cmd_simulate(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const int M = cfg.M.value_or(2);
  const auto params = build_params(cfg, single(cfg.N, "N"), scalar_C(cfg));
  const std::uint64_t seed = resolve_seed(cfg, err);
  const std::uint64_t n_blocks = cfg.n_blocks.value_or(100000);
  if (n_blocks < 1) throw ConfigError("n_blocks must be at least 1");
  const auto sol = Stage3Solution::solve(params.model, M, params.pi);
  const auto eq = liquidity_star(params, sol);
  const double depth = cfg.depth ? *cfg.depth : eq.L_star;

  ojson j;
  j["command"] = "simulate";
  j["config"] = config_to_json(cfg);
  j["M"] = M;
  j["viable"] = eq.viable;
  if (!(depth > 0.0)) {
    j["depth"] = num(depth);
    emit(cfg, dump(j), out);
    return kNotViable;
  }
  const double y0 = cfg.y0 ? *cfg.y0 : depth;
  const auto options = sim_options(cfg);
  const auto report =
      run_monte_carlo(sol, depth, params, n_blocks, seed, cfg.workers, y0, options);
  if (cfg.trace) {
    std::ofstream f(*cfg.trace);
    if (!f) throw ConfigError("cannot write trace to '" + *cfg.trace + "'");
    write_trace(f, sol, depth, params, std::min(cfg.trace_blocks, n_blocks), seed, y0, options);
  }

  const std::map<std::string, double> targets = {
      {"end_price", expected_end_price(sol)},
      {"aggregate_volume", depth * M * (sol.cutoff() - params.pi) / (2.0 * (M - 1))},
      {"lp_loss", -depth * M * s_m(sol)},
      {"active_count", M * params.model.survival(sol.cutoff())},
      {"participation_rate", params.model.survival(sol.cutoff())},
  };

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "name,mean,std_error,target\n";
    for (const auto& [name, est] : report.estimates) {
      os << name << ',' << fmt(est.mean) << ',' << fmt(est.std_error) << ','
         << fmt(targets.at(name)) << '\n';
    }
    for (const auto& r : report.rank_volume_profile) {
      os << "rank_" << r.rank << "_volume," << fmt(r.mean_volume) << ",," << '\n';
    }
    os << "# n_blocks=" << n_blocks << " seed=" << seed << " depth=" << fmt(depth)
       << " fee_ties=" << report.fee_ties << '\n';
    emit(cfg, os.str(), out);
    return kOk;
  }
  j["depth"] = num(depth);
  j["n_blocks"] = report.n_blocks;
  j["seed"] = report.seed;
  ojson est;
  for (const auto& [name, e] : report.estimates) {
    est[name] = {{"mean", num(e.mean)}, {"std_error", num(e.std_error)}, {"target", num(targets.at(name))}};
  }
  j["estimates"] = est;
  ojson prof = ojson::array();
  for (const auto& r : report.rank_volume_profile) {
    prof.push_back({{"rank", r.rank}, {"mean_volume", num(r.mean_volume)}, {"count", r.count}});
  }
  j["rank_volume_profile"] = prof;
  j["fee_ties"] = report.fee_ties;
  emit(cfg, dump(j), out);
  return kOk;
}

int cmd_verify(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const std::uint64_t n_blocks = cfg.n_blocks.value_or(kMinVerifyBlocks);
  if (n_blocks < kMinVerifyBlocks) {
    throw ConfigError("insufficient replications: verify needs n_blocks >= 100000, got " +
                      std::to_string(n_blocks));
  }
  const int M = cfg.M.value_or(2);
  const auto params = build_params(cfg, single(cfg.N, "N"), scalar_C(cfg));
  const std::uint64_t seed = resolve_seed(cfg, err);
  const auto checks = run_verify(cfg, params, M, n_blocks, seed, cfg.workers);

  const CheckResult* first_fail = nullptr;
  ojson jc = ojson::array();
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    if (!c.passed && !first_fail) first_fail = &c;
    jc.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  if (cfg.out) {
    ojson j;
    j["command"] = "verify";
    j["config"] = config_to_json(cfg);
    j["checks"] = jc;
    j["passed"] = first_fail == nullptr;
    emit(cfg, dump(j), out);
  }
  if (first_fail) {
    err << "verify failed: " << first_fail->name << '\n';
    return kVerifyFailed;
  }
  out << "all " << checks.size() << " checks passed\n";
  return kOk;
}

int cmd_blocktime(RunConfig cfg, std::ostream& out) {
  const int M = cfg.M.value_or(2);
  if (cfg.T_grid.empty()) cfg.T_grid = {6.0, 12.0, 24.0, 48.0, 96.0};
  const auto family = build_block_time_family(cfg);
  const auto table = cutoff_vs_T(family, M, cfg.pi, cfg.T_grid, cfg.workers);

  std::vector<std::vector<double>> rows;
  for (const auto& r : table.rows) {
    rows.push_back({r.T, family.v_bar_of_T(r.T), family.N_of_T(r.T), r.cutoff,
                    limit_liquidity_vs_T(family, cfg.pi, cfg.theta, r.T),
                    liquidity_vs_T(family, M, cfg.pi, cfg.theta, r.T)});
  }
  std::optional<double> shutdown;
  std::string shutdown_note;
  try {
    shutdown = shutdown_time(family, cfg.pi, cfg.theta,
                             {cfg.shutdown_bracket.first, cfg.shutdown_bracket.second,
                              numerics::Sign::Positive, numerics::Sign::Negative});
  } catch (const NoSignChange& e) {
    shutdown_note = e.what();
  }
  std::vector<double> linf;
  for (const auto& r : rows) linf.push_back(r[4]);
  const std::vector<std::string> columns = {"T", "v_bar", "N", "cutoff", "L_inf", "L_star"};

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "T,v_bar,N,cutoff,L_inf,L_star\n";
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << fmt(r[c]);
      os << '\n';
    }
    os << "# cutoff_strictly_increasing=" << (table.strictly_increasing ? "true" : "false")
       << " L_inf=" << monotonicity(linf)
       << " shutdown_time=" << (shutdown ? fmt(*shutdown) : std::string("none")) << '\n';
    if (!table.diagnostic.empty()) os << "# diagnostic: " << table.diagnostic << '\n';
    if (!shutdown_note.empty()) os << "# shutdown: " << shutdown_note << '\n';
    emit(cfg, os.str(), out);
    return kOk;
  }
  ojson j;
  j["command"] = "blocktime";
  j["config"] = config_to_json(cfg);
  j["M"] = M;
  j["columns"] = columns;
  ojson jr = ojson::array();
  for (const auto& r : rows) {
    ojson row = ojson::array();
    for (double x : r) row.push_back(num(x));
    jr.push_back(row);
  }
  j["rows"] = jr;
  j["cutoff_strictly_increasing"] = table.strictly_increasing;
  j["L_inf_monotonicity"] = monotonicity(linf);
  j["diagnostic"] = table.diagnostic;
  j["shutdown_time"] = shutdown ? num(*shutdown) : ojson(nullptr);
  if (!shutdown_note.empty()) j["shutdown_note"] = shutdown_note;
  emit(cfg, dump(j), out);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibrium solver and Monte Carlo verifier for priority-fee DEX markets",
               "pgamarket"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "Flat JSON config file (a report's embedded config works too)");
  app.add_option("--seed", f.seed, "Random seed (drawn from entropy and printed if omitted)");
  app.add_option("--workers", f.workers, "Worker threads");
  app.add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", f.out, "Write the report to PATH instead of stdout");
  app.add_option("--M", f.M, "Number of informed traders");
  app.add_option("--M-range", f.M_range, "Sweep M over LO:HI");
  app.add_option("--T-grid", f.T_grid, "Comma-separated block times");
  app.add_option("--C", f.C, "Information cost, or comma list to sweep");
  app.add_option("--N", f.N, "Noise mass, or comma list to sweep");
  app.add_option("--n-blocks", f.n_blocks, "Monte Carlo replications");
  app.add_option("--trace", f.trace, "simulate: write per-trader CSV rows for the first blocks");

  auto* solve = app.add_subcommand("solve", "Solve one economy");
  auto* sweep = app.add_subcommand("sweep", "Sweep one axis among M, T, C, N");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo report");
  auto* verify = app.add_subcommand("verify", "Run the oracle battery");
  auto* blocktime = app.add_subcommand("blocktime", "Block-time comparative statics");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    RunConfig cfg = resolve(f);
    if (*solve) return cmd_solve(cfg, out);
    if (*sweep) return cmd_sweep(cfg, out);
    if (*simulate) return cmd_simulate(cfg, out, err);
    if (*verify) return cmd_verify(cfg, out, err);
    if (*blocktime) return cmd_blocktime(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace pgamarket::cli
