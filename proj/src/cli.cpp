#include "jlese/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "jlese/errors.hpp"
#include "jlese/scoring.hpp"
#include "jlese/sweeps.hpp"

namespace jlese::cli {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string flag(bool b) { return b ? "1" : "0"; }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

void write_csv(std::ostream& os, const std::string& comment, const Table& t) {
  os << "# " << comment << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
}

// gnuplot-friendly twin: whitespace separated, column names in a comment.
void write_plot_data(std::ostream& os, const std::string& comment, const Table& t) {
  os << "# " << comment << "\n#";
  for (const auto& c : t.columns) os << ' ' << c;
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << row[i];
    os << '\n';
  }
}

struct Output {
  std::string out_path;
  std::string plot_path;
};

void add_output(CLI::App* cmd, Output& o, bool plot = true) {
  cmd->add_option("--out", o.out_path, "Output CSV path (default: stdout)");
  if (plot) cmd->add_option("--plot-data", o.plot_path, "Also write a gnuplot data file");
}

void emit(const Output& o, std::ostream& out, const std::string& comment, const Table& t) {
  if (o.out_path.empty()) {
    write_csv(out, comment, t);
  } else {
    std::ofstream f(o.out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + o.out_path + "'");
    write_csv(f, comment, t);
  }
  if (!o.plot_path.empty()) {
    std::ofstream f(o.plot_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open plot-data file '" + o.plot_path + "'");
    write_plot_data(f, comment, t);
  }
}

void add_market(CLI::App* cmd, MarketParams& m, bool with_yields = true) {
  cmd->add_option("--p", m.price, "Unit selling price")->capture_default_str();
  if (with_yields) {
    cmd->add_option("--y-high", m.y_high, "High-production yield")->capture_default_str();
    cmd->add_option("--y-low", m.y_low, "Low-production yield")->capture_default_str();
  }
  cmd->add_option("--loan", m.loan, "Loan principal L")->capture_default_str();
  cmd->add_option("--epsilon", m.epsilon, "Risk-free rate")->capture_default_str();
  cmd->add_option("--delta", m.delta, "Borrower discount factor")->capture_default_str();
}

std::string market_comment(const MarketParams& m, bool with_yields = true) {
  std::string s = "p=" + num(m.price);
  if (with_yields) s += " y_high=" + num(m.y_high) + " y_low=" + num(m.y_low);
  return s + " loan=" + num(m.loan) + " epsilon=" + num(m.epsilon) + " delta=" + num(m.delta);
}

RepaymentMode parse_mode(const std::string& s) {
  if (s == "exogenous") return RepaymentMode::kExogenous;
  if (s == "binding") return RepaymentMode::kBinding;
  throw ConfigError("--w-mode must be 'exogenous' or 'binding'");
}

std::vector<int> parse_int_grid(const std::string& text) {
  std::vector<int> out;
  for (double v : sweeps::parse_grid(text)) {
    if (v != std::floor(v) || v < 1 || v > 1e6) {
      throw ConfigError("group sizes must be positive integers, got " + num(v));
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<sweeps::YieldScenario> parse_yields(const std::string& text) {
  std::vector<sweeps::YieldScenario> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("yield pair '" + item + "' must look like YBAR:YLOW");
    }
    const auto hi = sweeps::parse_grid(item.substr(0, colon));
    const auto lo = sweeps::parse_grid(item.substr(colon + 1));
    if (hi.size() != 1 || lo.size() != 1) throw ConfigError("bad yield pair '" + item + "'");
    out.push_back({hi[0], lo[0]});
  }
  if (out.empty()) throw ConfigError("no yield pairs given");
  return out;
}

double default_repayment(const MarketParams& m) {
  return binding_repayment(0.5, 2, m).repayment;
}

// Each subcommand parses into its own state and installs a runner; the
// runner validates everything before computing.
struct Runner {
  std::function<int(std::ostream&, std::ostream&)> fn;
};

void setup_ceilings(CLI::App& app, Runner& runner) {
  auto* cmd = app.add_subcommand("ceilings", "Loan ceilings L1 (affordability) and L2 (incentive)");
  struct State {
    MarketParams market;
    std::string e_grid = "0.05:0.95:0.05";
    Output out;
  };
  auto st = std::make_shared<State>();
  add_market(cmd, st->market);
  cmd->add_option("--e-grid", st->e_grid, "Success probabilities (list or start:stop:step)")
      ->capture_default_str();
  add_output(cmd, st->out);
  cmd->callback([st, &runner] {
    runner.fn = [st](std::ostream& out, std::ostream& err) {
      const auto grid = sweeps::parse_grid(st->e_grid);
      const auto rows = sweeps::ceilings(st->market, grid);
      Table t{{"e", "L1", "L2", "binding"}, {}};
      bool violated = false;
      for (const auto& r : rows) {
        t.rows.push_back({num(r.e), num(r.affordability), num(r.incentive), num(r.incentive)});
        if (!(r.affordability > r.incentive)) {
          violated = true;
          err << "L1 <= L2 at e=" << num(r.e) << '\n';
        }
      }
      emit(st->out, out,
           "jlese ceilings " + market_comment(st->market) + " e_grid=" + st->e_grid, t);
      return violated ? exit_codes::kSolver : exit_codes::kOk;
    };
  });
}

void setup_group_size(CLI::App& app, Runner& runner) {
  auto* cmd = app.add_subcommand("sweep-group-size", "Optimal ESE score against group size n");
  struct State {
    MarketParams market;
    ScoreLink link{0.01, 0.0};
    CostModel cost{1000.0};
    int n_min = 1;
    int n_max = 100;
    Output out;
  };
  auto st = std::make_shared<State>();
  add_market(cmd, st->market);
  cmd->add_option("--k", st->link.slope, "Score-to-probability slope")->capture_default_str();
  cmd->add_option("--b", st->link.baseline, "Baseline success probability")->capture_default_str();
  cmd->add_option("--c", st->cost.scale, "Effort cost scale")->capture_default_str();
  cmd->add_option("--n-min", st->n_min, "Smallest group size")->capture_default_str();
  cmd->add_option("--n-max", st->n_max, "Largest group size")->capture_default_str();
  add_output(cmd, st->out);
  cmd->callback([st, &runner] {
    runner.fn = [st](std::ostream& out, std::ostream&) {
      const auto rows =
          sweeps::group_size(st->n_min, st->n_max, st->market, st->cost, st->link);
      Table t{{"n", "optimal_E", "at_boundary", "limit_E"}, {}};
      for (const auto& r : rows) {
        t.rows.push_back({std::to_string(r.n), num(r.optimum.score), flag(r.optimum.at_boundary),
                          num(r.limit)});
      }
      emit(st->out, out,
           "jlese sweep-group-size " + market_comment(st->market) + " k=" +
               num(st->link.slope) + " b=" + num(st->link.baseline) + " c=" +
               num(st->cost.scale) + " n=" + std::to_string(st->n_min) + ".." +
               std::to_string(st->n_max),
           t);
      return exit_codes::kOk;
    };
  });
}

struct MvFlags {
  std::optional<double> slope;
  std::optional<double> repayment;
  std::string gamma_grid = "0:1:0.05";
  std::string w_mode = "exogenous";
};

void add_mv_flags(CLI::App* cmd, MvFlags& f) {
  cmd->add_option("--k", f.slope, "Slope k (default (1-b)/100 per b)");
  cmd->add_option("--w", f.repayment, "Fixed repayment w (default: binding w at e=0.5, n=2)");
  cmd->add_option("--gamma-grid", f.gamma_grid, "Risk-aversion grid")->capture_default_str();
  cmd->add_option("--w-mode", f.w_mode, "exogenous | binding")->capture_default_str();
}

std::string mv_comment(const MvFlags& f, const MarketParams& m, double w) {
  return " k=" + (f.slope ? num(*f.slope) : std::string("(1-b)/100")) + " w=" + num(w) +
         " w_mode=" + f.w_mode + " gamma_grid=" + f.gamma_grid + " " + market_comment(m);
}

void setup_mv(CLI::App& app, Runner& runner) {
  auto* cmd = app.add_subcommand("sweep-mv", "Mean-variance optimal score over b x c x gamma");
  struct State {
    MarketParams market;
    std::string b_set = "0.3,0.5,0.7";
    std::string c_set = "800,1000,1200,1500,2000";
    MvFlags mv;
    Output out;
  };
  auto st = std::make_shared<State>();
  add_market(cmd, st->market);
  cmd->add_option("--b", st->b_set, "Baseline set")->capture_default_str();
  cmd->add_option("--c", st->c_set, "Cost-scale set")->capture_default_str();
  add_mv_flags(cmd, st->mv);
  add_output(cmd, st->out);
  cmd->callback([st, &runner] {
    runner.fn = [st](std::ostream& out, std::ostream&) {
      sweeps::MvSweepSpec spec;
      spec.market = st->market;
      spec.baselines = sweeps::parse_grid(st->b_set);
      spec.costs = sweeps::parse_grid(st->c_set);
      spec.gammas = sweeps::parse_grid(st->mv.gamma_grid);
      spec.slope = st->mv.slope.value_or(-1.0);
      spec.mode = parse_mode(st->mv.w_mode);
      st->market.validate();
      spec.repayment = st->mv.repayment.value_or(default_repayment(st->market));
      const auto rows = sweeps::mean_variance(spec);
      Table t{{"b", "c", "gamma", "optimal_E", "at_boundary"}, {}};
      for (const auto& r : rows) {
        t.rows.push_back({num(r.baseline), num(r.cost), num(r.gamma), num(r.optimum.score),
                          flag(r.optimum.at_boundary)});
      }
      emit(st->out, out,
           "jlese sweep-mv b=" + st->b_set + " c=" + st->c_set +
               mv_comment(st->mv, st->market, spec.repayment),
           t);
      return exit_codes::kOk;
    };
  });
}

void setup_yield(CLI::App& app, Runner& runner) {
  auto* cmd = app.add_subcommand("sweep-yield", "Mean-variance optimal score for yield scenarios");
  struct State {
    MarketParams market;
    std::string yields = "1000:500,600:300";
    double baseline = 0.5;
    double cost = 1000.0;
    MvFlags mv;
    Output out;
  };
  auto st = std::make_shared<State>();
  add_market(cmd, st->market, false);
  cmd->add_option("--yields", st->yields, "Yield pairs YBAR:YLOW,...")->capture_default_str();
  cmd->add_option("--b", st->baseline, "Baseline success probability")->capture_default_str();
  cmd->add_option("--c", st->cost, "Effort cost scale")->capture_default_str();
  add_mv_flags(cmd, st->mv);
  add_output(cmd, st->out);
  cmd->callback([st, &runner] {
    runner.fn = [st](std::ostream& out, std::ostream&) {
      sweeps::YieldSweepSpec spec;
      spec.market = st->market;
      spec.scenarios = parse_yields(st->yields);
      spec.gammas = sweeps::parse_grid(st->mv.gamma_grid);
      spec.baseline = st->baseline;
      spec.cost = st->cost;
      spec.slope = st->mv.slope.value_or(-1.0);
      spec.mode = parse_mode(st->mv.w_mode);
      spec.repayment = st->mv.repayment.value_or(default_repayment(st->market));
      const auto rows = sweeps::yields(spec);
      Table t{{"scenario", "gamma", "optimal_E"}, {}};
      for (const auto& r : rows) t.rows.push_back({r.scenario, num(r.gamma), num(r.optimum.score)});
      emit(st->out, out,
           "jlese sweep-yield yields=" + st->yields + " b=" + num(st->baseline) + " c=" +
               num(st->cost) + mv_comment(st->mv, st->market, spec.repayment),
           t);
      return exit_codes::kOk;
    };
  });
}

void setup_simulate(CLI::App& app, Runner& runner) {
  auto* cmd = app.add_subcommand("simulate", "Monte Carlo member profit against exact moments");
  struct State {
    MarketParams market;
    std::string e_grid = "0.5";
    std::string n_grid = "2";
    std::optional<double> repayment;
    SimConfig sim;
    Output out;
  };
  auto st = std::make_shared<State>();
  add_market(cmd, st->market);
  cmd->add_option("--e", st->e_grid, "Success probabilities")->capture_default_str();
  cmd->add_option("--n", st->n_grid, "Group sizes")->capture_default_str();
  cmd->add_option("--w", st->repayment, "Repayment w (default: binding w per row)");
  cmd->add_option("--trials", st->sim.trials, "Trials per row")->capture_default_str();
  cmd->add_option("--seed", st->sim.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", st->sim.threads, "Worker threads (0 = all cores)");
  add_output(cmd, st->out);
  cmd->callback([st, &runner] {
    runner.fn = [st](std::ostream& out, std::ostream& err) {
      const auto es = sweeps::parse_grid(st->e_grid);
      const auto ns = parse_int_grid(st->n_grid);
      if (st->repayment && !(*st->repayment > 0.0)) throw ConfigError("--w must be > 0");
      const auto rows =
          sweeps::simulate(es, ns, st->repayment.value_or(-1.0), st->market, st->sim);
      Table t{{"e", "n", "trials", "seed", "empirical_mean", "analytic_mean", "empirical_var",
               "analytic_var", "z_mean"},
              {}};
      bool failed = false;
      for (const auto& r : rows) {
        t.rows.push_back({num(r.e), std::to_string(r.n), std::to_string(r.sim.trials),
                          std::to_string(r.sim.seed), num(r.sim.empirical_mean),
                          num(r.exact.mean), num(r.sim.empirical_variance),
                          num(r.exact.variance), num(r.z_mean)});
        if (!(std::abs(r.z_mean) <= 4.0)) {
          failed = true;
          err << "|z_mean| > 4 at e=" << num(r.e) << " n=" << r.n << '\n';
        }
      }
      emit(st->out, out,
           "jlese simulate " + market_comment(st->market) + " w=" +
               (st->repayment ? num(*st->repayment) : std::string("binding")),
           t);
      return failed ? exit_codes::kSolver : exit_codes::kOk;
    };
  });
}

void setup_score(CLI::App& app, Runner& runner) {
  auto* cmd = app.add_subcommand("score", "Composite ESE scores from metric records");
  struct State {
    std::string metrics;
    std::string schema;
    Output out;
  };
  auto st = std::make_shared<State>();
  cmd->add_option("--metrics", st->metrics, "Metrics CSV (farmer_id,metric_id,value)")
      ->required();
  cmd->add_option("--schema", st->schema, "Schema YAML")->required();
  add_output(cmd, st->out, false);
  cmd->callback([st, &runner] {
    runner.fn = [st](std::ostream& out, std::ostream&) {
      const auto scheme = scoring::load_scheme(st->schema);
      std::ifstream in(st->metrics, std::ios::binary);
      if (!in) throw ConfigError("cannot open metrics file '" + st->metrics + "'");
      const auto records = scoring::read_metrics_csv(in, st->metrics);
      const auto scores = scoring::composite_score(records, scheme);

      std::ostringstream body;
      body << "# jlese score schema=" << st->schema << " normalization="
           << (scheme.normalization == scoring::Normalization::kMinMax ? "MIN_MAX"
                                                                       : "Z_SCORE_CLIPPED")
           << '\n';
      scoring::write_scores_csv(body, scores);
      if (st->out.out_path.empty()) {
        out << body.str();
      } else {
        std::ofstream f(st->out.out_path, std::ios::binary);
        if (!f) throw ConfigError("cannot open output file '" + st->out.out_path + "'");
        f << body.str();
      }
      return exit_codes::kOk;
    };
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Individual-ESE joint liability lending model"};
  app.set_config("--config", "", "TOML/INI config file; flags override it");
  app.require_subcommand(1);
  Runner runner;
  setup_ceilings(app, runner);
  setup_group_size(app, runner);
  setup_mv(app, runner);
  setup_yield(app, runner);
  setup_simulate(app, runner);
  setup_score(app, runner);

  // CLI11 consumes arguments from the back and without the program name.
  std::vector<std::string> rev;
  for (std::size_t i = args.size(); i > 1; --i) rev.push_back(args[i - 1]);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_codes::kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_codes::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_codes::kUsage;
  }

  try {
    return runner.fn(out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_codes::kUsage;
  } catch (const DomainError& e) {
    err << "invalid parameter: " << e.what() << '\n';
    return exit_codes::kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return exit_codes::kData;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return exit_codes::kSolver;
  }
}

}  // namespace jlese::cli
