#include "relaxctl/cli.hpp"

#include "relaxctl/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace relaxctl::cli {

namespace {

namespace fs = std::filesystem;

struct Config {
  std::string model = "rademacher_ode";
  std::string control = "uniform";
  std::string atoms;  // empty: endpoints of the model's action box
  std::string regime = "relaxed";
  int N = 1000;
  int K = 64;
  double T = 0.0;  // 0: the model's horizon
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = ".";
  bool check = false;
  int resolution = 4;
  int blocks = 1;
  int n = 64;
  std::string ns;  // empty: subcommand default
  int iterations = 50;
  double step = 0.1;
  int samples = 10000;
  bool export_paths = false;
  double reference = std::nan("");
  double rel_tol = 0.05;
};

// Maps config-file keys onto the option that shadows them and a setter.
struct Field {
  std::string key;
  std::function<void(Config&, const Json&)> set;
  std::function<Json(const Config&)> get;
};

template <typename T>
Field field(std::string key, T Config::*member) {
  return {key, [member](Config& c, const Json& j) { c.*member = j.get<T>(); },
          [member](const Config& c) { return Json(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      field("model", &Config::model),
      field("control", &Config::control),
      {"atoms",
       [](Config& c, const Json& j) {
         if (j.is_string()) {
           c.atoms = j.get<std::string>();
           return;
         }
         std::string joined;
         for (const auto& v : j) joined += (joined.empty() ? "" : ",") + format_real(v.get<double>());
         c.atoms = joined;
       },
       [](const Config& c) { return Json(c.atoms); }},
      field("regime", &Config::regime),
      field("N", &Config::N),
      field("K", &Config::K),
      field("T", &Config::T),
      field("seed", &Config::seed),
      field("threads", &Config::threads),
      field("out", &Config::out),
      field("check", &Config::check),
      field("resolution", &Config::resolution),
      field("blocks", &Config::blocks),
      field("n", &Config::n),
      {"ns",
       [](Config& c, const Json& j) {
         if (j.is_string()) {
           c.ns = j.get<std::string>();
           return;
         }
         std::string joined;
         for (const auto& v : j) joined += (joined.empty() ? "" : ",") + std::to_string(v.get<int>());
         c.ns = joined;
       },
       [](const Config& c) { return Json(c.ns); }},
      field("iterations", &Config::iterations),
      field("step", &Config::step),
      field("samples", &Config::samples),
      field("export_paths", &Config::export_paths),
      field("reference", &Config::reference),
      field("rel_tol", &Config::rel_tol),
  };
  return table;
}

std::string option_name(const std::string& key) {
  std::string name = "--" + key;
  std::replace(name.begin(), name.end(), '_', '-');
  return name;
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("{}: '{}' is not a number", what, item));
    }
  }
  if (values.empty()) throw ValidationError(fmt::format("{}: empty list", what));
  return values;
}

std::vector<int> parse_ints(const std::string& text, const std::string& what) {
  std::vector<int> values;
  for (double v : parse_reals(text, what)) {
    if (v != std::floor(v) || v < 1) throw ValidationError(fmt::format("{}: {} is not a positive integer", what, v));
    values.push_back(static_cast<int>(v));
  }
  return values;
}

class Runner {
 public:
  Runner(std::string subcommand, Config config, std::ostream& out)
      : name_(std::move(subcommand)), cfg_(std::move(config)), out_(out), model_(lookup_model(cfg_.model)) {
    if (cfg_.N < 1) throw ValidationError("--N must be >= 1");
    if (cfg_.K < 1) throw ValidationError("--K must be >= 1");
    if (cfg_.threads < 1) throw ValidationError("--threads must be >= 1");
    if (cfg_.T == 0.0) cfg_.T = model_.horizon;
    if (!(cfg_.T > 0.0)) throw ValidationError("--T must be positive");
  }

  int execute() {
    std::string summary;
    if (name_ == "simulate") summary = simulate();
    else if (name_ == "cost") summary = cost();
    else if (name_ == "chatter") summary = chatter_cmd();
    else if (name_ == "reduce") summary = reduce();
    else if (name_ == "optimize") summary = optimize();
    else if (name_ == "counterexample") summary = counterexample();
    else if (name_ == "value-gap") summary = value_gap_cmd();
    else if (name_ == "validate-model") summary = validate();
    write_manifest();
    const bool failed = cfg_.check && !check_passed_;
    out_ << name_ << ": " << summary;
    if (cfg_.check) out_ << (failed ? " check=FAIL" : " check=PASS");
    out_ << '\n';
    if (failed) {
      for (const auto& f : failures_) out_ << "  failed: " << f << '\n';
      return kCheckFailed;
    }
    return kOk;
  }

 private:
  TimeGrid time() const { return TimeGrid(cfg_.T, cfg_.K); }

  ActionGrid atoms() const {
    if (!cfg_.atoms.empty()) return make_action_grid(parse_reals(cfg_.atoms, "--atoms"));
    if (model_.action_dim != 1) throw ValidationError("--atoms is required for multi-dimensional actions");
    return make_action_grid(std::vector<double>{model_.action_lo(0), model_.action_hi(0)});
  }

  SlidingControl control() const {
    const std::string& spec = cfg_.control;
    if (spec == "uniform") return SlidingControl::uniform(atoms(), time());
    if (spec.rfind("dirac:", 0) == 0) {
      const auto grid = atoms();
      const auto coords = parse_reals(spec.substr(6), "--control dirac");
      ActionVec a(static_cast<Eigen::Index>(coords.size()));
      for (std::size_t c = 0; c < coords.size(); ++c) a(static_cast<Eigen::Index>(c)) = coords[c];
      const int index = grid.find(a);
      if (index < 0) throw ValidationError(fmt::format("dirac atom {} is not on the action grid", spec.substr(6)));
      return SlidingControl::dirac(grid, time(), index);
    }
    if (spec.rfind("file:", 0) == 0) {
      std::ifstream in(spec.substr(5));
      if (!in) throw ValidationError(fmt::format("cannot open control file '{}'", spec.substr(5)));
      Json j;
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("control file is not valid JSON: {}", e.what()));
      }
      if (j.contains("assignment")) return embed_strict(strict_from_json(j));
      return sliding_from_json(j);
    }
    throw ValidationError(fmt::format("unknown control '{}'; expected dirac:<atom>, uniform or file:<path>", spec));
  }

  Regime regime() const {
    if (cfg_.regime == "strict") return Regime::strict;
    if (cfg_.regime == "naive") return Regime::naive;
    if (cfg_.regime == "relaxed") return Regime::relaxed;
    throw ValidationError(fmt::format("unknown regime '{}'; expected strict, naive or relaxed", cfg_.regime));
  }

  std::vector<int> ns(std::vector<int> fallback) const {
    return cfg_.ns.empty() ? fallback : parse_ints(cfg_.ns, "--ns");
  }

  SearchOptions search() const { return {cfg_.N, cfg_.seed, cfg_.threads}; }

  void expect(bool ok, std::string what) {
    if (!ok) {
      check_passed_ = false;
      failures_.push_back(std::move(what));
    }
  }

  void write(const std::string& file, const std::string& content) {
    fs::create_directories(cfg_.out);
    std::ofstream f(fs::path(cfg_.out) / file, std::ios::binary);
    if (!f) throw ValidationError(fmt::format("cannot write '{}'", (fs::path(cfg_.out) / file).string()));
    f << content;
    outputs_.push_back(file);
  }

  void write_json(const std::string& file, const Json& j) { write(file, j.dump(2) + "\n"); }

  template <typename Fn>
  void write_csv(const std::string& file, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write(file, os.str());
  }

  void write_manifest() {
    Json config = Json::object();
    for (const auto& f : fields()) {
      // Worker count and output location never affect output bytes.
      if (f.key == "threads" || f.key == "out") continue;
      if ((f.key == "reference" || f.key == "rel_tol") && std::isnan(cfg_.reference)) continue;
      config[f.key] = f.get(cfg_);
    }
    Json manifest{{"subcommand", name_},
                  {"version", kVersion},
                  {"seed", cfg_.seed},
                  {"rng_scheme", GaussianStream::kScheme},
                  {"config", std::move(config)},
                  {"outputs", outputs_}};
    if (cfg_.check) manifest["check"] = {{"pass", check_passed_}, {"failures", failures_}};
    fs::create_directories(cfg_.out);
    std::ofstream(fs::path(cfg_.out) / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  }

  std::string simulate() {
    const auto mu = control();
    SimOptions opts{cfg_.threads, cfg_.export_paths ? Recording::full : Recording::summary};
    const auto ens = relaxctl::simulate(model_, mu, regime(), cfg_.N, cfg_.seed, opts);
    const auto est = estimate_cost(model_, ens, mu);
    write_csv("summary.csv", [&](std::ostream& os) { write_summary_csv(os, ens); });
    if (cfg_.export_paths) write_csv("paths.csv", [&](std::ostream& os) { write_paths_csv(os, ens); });
    write_json("cost.json", to_json(est));
    return fmt::format("model={} regime={} N={} K={} J={:.6g} stderr={:.3g} box_exits={}", cfg_.model, cfg_.regime,
                       cfg_.N, cfg_.K, est.mean, est.std_error, ens.box_exits());
  }

  std::string cost() {
    const auto mu = control();
    const auto est = simulate_cost(model_, mu, regime(), cfg_.N, cfg_.seed, cfg_.threads);
    write_json("cost.json", to_json(est));
    return fmt::format("model={} regime={} J={:.6g} stderr={:.3g}", cfg_.model, cfg_.regime, est.mean,
                       est.std_error);
  }

  std::string chatter_cmd() {
    const auto mu = control();
    const auto list = ns({2, 4, 8, 16, 32, 64});
    const auto study = convergence_study(model_, mu, list, cfg_.N, cfg_.seed, cfg_.threads);
    write_csv("study.csv", [&](std::ostream& os) { write_study_csv(os, study); });

    const TestFunction g = [](double, const ActionVec& a) { return a(0); };
    std::vector<double> errors;
    std::ostringstream err_csv;
    err_csv << "n,chatter_error\n";
    for (int n : list) {
      errors.push_back(chatter_error(mu, n, g));
      err_csv << n << ',' << format_real(errors.back()) << '\n';
    }
    write("chatter_error.csv", err_csv.str());
    const double slope = loglog_slope(list, errors);

    if (cfg_.check) {
      const auto at = [&](int n) -> const ConvergenceRow& {
        for (const auto& r : study.rows) {
          if (r.n == n) return r;
        }
        throw ValidationError(fmt::format("--check needs n = {} in --ns", n));
      };
      const double d2 = std::abs(at(2).cost_difference.mean);
      const double d32 = std::abs(at(32).cost_difference.mean);
      expect(d32 * 4.0 <= d2, fmt::format("|dJ(32)| = {} is not 4x below |dJ(2)| = {}", d32, d2));
      expect(slope <= -0.8, fmt::format("chatter_error slope {} > -0.8", slope));
    }
    const auto& last = study.rows.back();
    return fmt::format("model={} n_max={} dJ={:.6g} stderr={:.3g} chatter_error_slope={:.4f}", cfg_.model, last.n,
                       last.cost_difference.mean, last.cost_difference.std_error, slope);
  }

  static double loglog_slope(const std::vector<int>& ns, const std::vector<double>& ys) {
    if (ns.size() < 2) return std::nan("");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double x = std::log(static_cast<double>(ns[i]));
      const double y = std::log(ys[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }

  std::string reduce() {
    const auto mu = control();
    SimOptions opts{cfg_.threads, Recording::summary};
    const auto [ens, driver] = simulate_relaxed(model_, mu, cfg_.N, cfg_.seed, opts);
    const auto reduced = sliding_from_relaxed(model_, mu, ens);
    write_json("reduced_control.json", to_json(reduced.control));

    // Per-row action moments (sum alpha a, sum alpha a^2) on the first action coordinate.
    double moment_error = 0.0;
    for (int k = 0; k < mu.steps(); ++k) {
      double m1 = 0, m2 = 0, r1 = 0, r2 = 0;
      for (int i = 0; i < mu.atoms(); ++i) {
        const double a = mu.grid().atom(i)(0);
        m1 += mu.weight(k, i) * a;
        m2 += mu.weight(k, i) * a * a;
        r1 += reduced.control.weight(k, i) * a;
        r2 += reduced.control.weight(k, i) * a * a;
      }
      moment_error = std::max({moment_error, std::abs(m1 - r1), std::abs(m2 - r2)});
    }

    const auto before = simulate_cost(model_, mu, Regime::relaxed, cfg_.N, cfg_.seed, cfg_.threads);
    const auto after = simulate_cost(model_, reduced.control, Regime::relaxed, cfg_.N, cfg_.seed, cfg_.threads);
    const double combined = std::hypot(before.std_error, after.std_error);

    const auto strict = extract_strict_if_convex(model_, mu, ens);
    Json report = to_json(reduced);
    report["action_moment_error"] = moment_error;
    report["cost_before"] = to_json(before);
    report["cost_after"] = to_json(after);
    if (const auto* u = std::get_if<StrictControl>(&strict)) {
      report["strict"] = to_json(*u);
    } else {
      const auto& nr = std::get<NotRepresentable>(strict);
      report["strict"] = {{"representable", false}, {"step", nr.step}, {"residual", nr.residual}};
    }
    write_json("reduction.json", report);

    if (cfg_.check) {
      const int d = model_.state_dim;
      expect(reduced.max_residual <= 1e-10, fmt::format("moment residual {} > 1e-10", reduced.max_residual));
      expect(reduced.max_support <= d + d * d + 2,
             fmt::format("support {} > {}", reduced.max_support, d + d * d + 2));
      expect(moment_error <= 1e-10, fmt::format("action moment error {} > 1e-10", moment_error));
      expect(std::abs(before.mean - after.mean) <= 3.0 * combined,
             fmt::format("cost changed by {} > 3 combined SE ({})", after.mean - before.mean, combined));
    }
    return fmt::format("model={} max_support={} residual={:.3g} J_before={:.6g} J_after={:.6g}", cfg_.model,
                       reduced.max_support, reduced.max_residual, before.mean, after.mean);
  }

  std::string optimize() {
    const auto grid = atoms();
    const auto lattice = grid_search(model_, grid, time(), cfg_.resolution, cfg_.blocks, search());
    OptimizationReport best = lattice;
    std::vector<TraceEntry> trace = lattice.trace;
    if (cfg_.iterations > 0) {
      DescentOptions descent{cfg_.iterations, cfg_.step, cfg_.blocks, search()};
      best = coordinate_descent(model_, lattice.best_control, descent);
      best.budget += lattice.budget;
      best.method = "grid_search+coordinate_descent";
      for (auto t : best.trace) {
        t.iteration += lattice.budget;
        trace.push_back(t);
      }
    }
    Json report = to_json(best);
    report["lattice"] = to_json(lattice);
    write_json("report.json", report);
    write_json("best_control.json", to_json(best.best_control));
    write_csv("trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });

    if (cfg_.check) {
      if (!std::isnan(cfg_.reference)) {
        const double rel = std::abs(best.best_cost.mean - cfg_.reference) / std::abs(cfg_.reference);
        expect(rel <= cfg_.rel_tol, fmt::format("relative error {} to reference {} exceeds {}", rel,
                                                cfg_.reference, cfg_.rel_tol));
      } else if (cfg_.model == "rademacher_ode") {
        for (const auto& row : best.best_block_weights) {
          for (double w : row) {
            expect(std::abs(w - 1.0 / static_cast<double>(row.size())) <= 0.05,
                   fmt::format("weight {} is not within 0.05 of uniform", w));
          }
        }
        expect(best.best_cost.mean <= 1e-3, fmt::format("best cost {} > 1e-3", best.best_cost.mean));
      } else {
        throw ValidationError(fmt::format("no built-in check for model '{}'; pass --reference", cfg_.model));
      }
    }
    std::string weights;
    for (const auto& row : best.best_block_weights) {
      weights += fmt::format("{}({})", weights.empty() ? "" : ",", fmt::join(row, ","));
    }
    return fmt::format("model={} method={} budget={} J={:.6g} stderr={:.3g} weights={}", cfg_.model, best.method,
                       best.budget, best.best_cost.mean, best.best_cost.std_error, weights);
  }

  std::string counterexample() {
    if (cfg_.model != "diffusion_counterexample") {
      throw ValidationError("counterexample runs on --model diffusion_counterexample only");
    }
    const auto grid = make_action_grid(std::vector<double>{-1.0, 1.0});
    const auto tg = time();
    const auto half = SlidingControl::uniform(grid, tg);
    SimOptions opts{cfg_.threads, Recording::summary};
    const double x0 = model_.x0(0);

    const auto naive = simulate_naive_relaxed(model_, half, cfg_.N, cfg_.seed, opts);
    const auto strict = simulate_strict(model_, rademacher_control(grid, cfg_.n, tg), cfg_.N, cfg_.seed, opts);
    const auto [relaxed, driver] = simulate_relaxed(model_, half, cfg_.N, cfg_.seed, opts);

    const double max_dev = std::sqrt(*std::max_element(naive.sup_deviation().begin(), naive.sup_deviation().end()));
    auto second_moment = [&](const ParticleEnsemble& e) {
      std::vector<double> v(static_cast<std::size_t>(cfg_.N));
      for (int j = 0; j < cfg_.N; ++j) v[static_cast<std::size_t>(j)] = std::pow(e.terminal(j)(0) - x0, 2);
      return summarize(std::move(v));
    };
    std::vector<double> gap(static_cast<std::size_t>(cfg_.N));
    for (int j = 0; j < cfg_.N; ++j) {
      gap[static_cast<std::size_t>(j)] = std::pow(strict.terminal(j)(0) - naive.terminal(j)(0), 2);
    }
    const auto strict_m2 = second_moment(strict);
    const auto relaxed_m2 = second_moment(relaxed);
    const auto naive_m2 = second_moment(naive);
    const auto strict_gap = summarize(std::move(gap));
    const auto qv_lo = qv_estimate(driver, half, {0}, tg.horizon());
    const auto qv_hi = qv_estimate(driver, half, {1}, tg.horizon());
    const auto qv_all = qv_estimate(driver, half, {0, 1}, tg.horizon());

    const std::string strict_name = fmt::format("strict_rademacher_{}", cfg_.n);
    std::ostringstream csv;
    csv << "regime,statistic,value,stderr\n";
    auto row = [&](const std::string& regime, const std::string& stat, double value, double se) {
      csv << regime << ',' << stat << ',' << format_real(value) << ',' << format_real(se) << '\n';
    };
    row("naive", "max_abs_deviation", max_dev, 0.0);
    row("naive", "terminal_second_moment", naive_m2.mean, naive_m2.std_error);
    row(strict_name, "terminal_second_moment", strict_m2.mean, strict_m2.std_error);
    row(strict_name, "l2_distance_to_naive", strict_gap.mean, strict_gap.std_error);
    row("relaxed", "terminal_second_moment", relaxed_m2.mean, relaxed_m2.std_error);
    row("relaxed", "qv_atom_-1", qv_lo.value, qv_lo.std_error);
    row("relaxed", "qv_atom_1", qv_hi.value, qv_hi.std_error);
    row("relaxed", "qv_all_atoms", qv_all.value, qv_all.std_error);
    write("counterexample.csv", csv.str());

    const double expected = tg.horizon();
    if (cfg_.check) {
      expect(max_dev <= 1e-12, fmt::format("naive state moved by {}", max_dev));
      auto near = [&](const CostEstimate& e, const std::string& what) {
        expect(std::abs(e.mean - expected) <= 3.0 * e.std_error,
               fmt::format("{} = {} +- {} is not within 3 SE of {}", what, e.mean, e.std_error, expected));
      };
      near(strict_m2, "strict E[(X_T - x0)^2]");
      near(relaxed_m2, "relaxed E[(X_T - x0)^2]");
      near(strict_gap, "E|X^n_T - X^naive_T|^2");
    }
    return fmt::format("N={} K={} naive_max_dev={:.3g} strict_m2={:.6g} relaxed_m2={:.6g} l2_gap={:.6g}", cfg_.N,
                       cfg_.K, max_dev, strict_m2.mean, relaxed_m2.mean, strict_gap.mean);
  }

  std::string value_gap_cmd() {
    ValueGapOptions opts;
    opts.blocks = cfg_.blocks;
    opts.resolution = cfg_.resolution;
    opts.descent_iterations = cfg_.iterations;
    opts.descent_step = cfg_.step;
    opts.ns = ns({4, 16, 64});
    opts.search = search();
    const auto report = value_gap(model_, atoms(), time(), opts);
    write_json("value_gap.json", to_json(report));
    write_json("best_control.json", to_json(report.relaxed_best.best_control));
    write_csv("trace.csv", [&](std::ostream& os) { write_trace_csv(os, report.relaxed_best.trace); });

    if (cfg_.check) {
      // The declared global bound dominates sup |h|.
      const double sup_h = model_.bound;
      double previous = std::numeric_limits<double>::infinity();
      double previous_se = 0.0;
      for (const auto& row : report.bridge) {
        const double limit = 2.0 * sup_h * cfg_.T / row.n + 3.0 * row.difference.std_error;
        expect(std::abs(row.difference.mean) <= limit,
               fmt::format("n={}: |dJ| = {} > {}", row.n, std::abs(row.difference.mean), limit));
        const double tol = 3.0 * std::hypot(row.difference.std_error, previous_se);
        expect(std::abs(row.difference.mean) <= previous + tol,
               fmt::format("n={}: chattered gap did not decrease", row.n));
        previous = std::abs(row.difference.mean);
        previous_se = row.difference.std_error;
      }
    }
    return fmt::format("model={} J_strict={:.6g} J_relaxed={:.6g} gap={:.6g} stderr={:.3g}", cfg_.model,
                       report.strict_best.best_cost.mean, report.relaxed_best.best_cost.mean, report.gap.mean,
                       report.gap.std_error);
  }

  std::string validate() {
    const auto report = validate_model(model_, cfg_.samples, cfg_.seed);
    write_json("validation.json", to_json(report));
    if (cfg_.check) {
      for (const auto& c : report.checks) expect(c.pass, fmt::format("{} violates its bounds: {}", c.function, c.witness));
    }
    return fmt::format("model={} samples={} result={}", cfg_.model, cfg_.samples, report.pass ? "PASS" : "FAIL");
  }

  std::string name_;
  Config cfg_;
  std::ostream& out_;
  ModelSpec model_;
  bool check_passed_ = true;
  std::vector<std::string> failures_;
  std::vector<std::string> outputs_;
};

// CLI11 reads "-1,1" as a flag; glue negative numeric values onto their option.
std::vector<std::string> glue_negative_values(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) == 0 && a.find('=') == std::string::npos && i + 1 < args.size()) {
      const auto& next = args[i + 1];
      if (next.size() > 1 && next[0] == '-' && (std::isdigit(static_cast<unsigned char>(next[1])) || next[1] == '.')) {
        out.push_back(a + "=" + next);
        ++i;
        continue;
      }
    }
    out.push_back(a);
  }
  return out;
}

void add_options(CLI::App* sub, Config& c, std::string& config_path) {
  sub->add_option("--config", config_path, "JSON config file (flags take precedence)");
  sub->add_option("--model", c.model, "model preset");
  sub->add_option("--control", c.control, "dirac:<atom> | uniform | file:<path>");
  sub->add_option("--atoms", c.atoms, "comma-separated action atoms");
  sub->add_option("--regime", c.regime, "strict | naive | relaxed");
  sub->add_option("--N", c.N, "particles");
  sub->add_option("--K", c.K, "time steps");
  sub->add_option("--T", c.T, "horizon (default: model horizon)");
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--threads", c.threads, "worker threads");
  sub->add_option("--out", c.out, "output directory");
  sub->add_flag("--check", c.check, "evaluate acceptance thresholds");
  sub->add_option("--resolution", c.resolution, "simplex lattice resolution");
  sub->add_option("--blocks", c.blocks, "number of constant blocks");
  sub->add_option("--n", c.n, "Rademacher frequency");
  sub->add_option("--ns", c.ns, "comma-separated chattering levels");
  sub->add_option("--iterations", c.iterations, "coordinate descent cycles");
  sub->add_option("--step", c.step, "coordinate descent step");
  sub->add_option("--samples", c.samples, "validation samples");
  sub->add_flag("--export-paths", c.export_paths, "write every particle path");
  sub->add_option("--reference", c.reference, "reference optimal cost for --check");
  sub->add_option("--rel-tol", c.rel_tol, "relative tolerance against --reference");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relaxed-control mean-field SDE toolkit", "relaxctl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Config cfg;
  std::string config_path;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate a particle ensemble"},
      {"cost", "estimate the cost of a control"},
      {"chatter", "chattering convergence study"},
      {"reduce", "Caratheodory support reduction of a relaxed control"},
      {"optimize", "lattice search plus coordinate descent"},
      {"counterexample", "strict, naive and relaxed dynamics under a control-dependent diffusion"},
      {"value-gap", "best strict versus best relaxed cost"},
      {"validate-model", "sample a preset's bound and Lipschitz constants"},
  };
  for (const auto& [name, help] : commands) add_options(app.add_subcommand(name, help), cfg, config_path);

  try {
    auto argv = glue_negative_values(args);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidationError;
  }
  CLI::App* sub = app.get_subcommands().front();

  try {
    bool seed_given = sub->count("--seed") > 0;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError(fmt::format("cannot open config '{}'", config_path));
      Json j;
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("config is not valid JSON: {}", e.what()));
      }
      if (!j.is_object()) throw ValidationError("config must be a JSON object");
      for (const auto& [key, value] : j.items()) {
        const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.key == key; });
        if (it == fields().end()) throw ValidationError(fmt::format("unknown config key '{}'", key));
        if (key == "seed") seed_given = true;
        if (sub->count(option_name(key)) > 0) continue;
        try {
          it->set(cfg, value);
        } catch (const nlohmann::json::exception& e) {
          throw ValidationError(fmt::format("config key '{}': {}", key, e.what()));
        }
      }
    }
    if (!seed_given) {
      if (const char* env = std::getenv("RELAXCTL_SEED")) {
        try {
          std::size_t used = 0;
          cfg.seed = std::stoull(env, &used);
          if (used != std::string(env).size()) throw std::invalid_argument(env);
        } catch (const std::exception&) {
          throw ValidationError(fmt::format("RELAXCTL_SEED='{}' is not an unsigned integer", env));
        }
      }
    }
    return Runner(sub->get_name(), cfg, out).execute();
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kSimulationError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
}

}  // namespace relaxctl::cli
