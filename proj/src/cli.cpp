#include "mfh/cli.hpp"

#include "mfh/io.hpp"
#include "mfh/linalg.hpp"
#include "mfh/reference_example.hpp"
#include "mfh/verification.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

namespace mfh::cli {

namespace {

struct Config {
  std::string input;
  std::optional<double> gamma;
  std::string format = "table";
  std::string output;
  std::string sequence;
  std::uint64_t seed = kDefaultSeed;
  int paths = 100000;
  int threads = 1;
  std::string noise = "gaussian";
  std::string policy = "optimal";
  bool particles = false;
  std::vector<int> particle_counts{10, 100, 1000};
  int reps = 50;
  double lo = 0.01;
  double hi = 1.0;
  double tol = 1e-4;
  int scan_points = 50;
  int perturbations = 200;
  int norm_policies = 1000;
  SolverOptions solver;
  double psi_tol = 1e-9;
};

/// Infeasibility surfaced from a command handler.
struct Infeasible {
  FeasibilityFailure failure;
};

using io::Json;

std::string fixed(double x, int decimals = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << x;
  return s.str();
}

std::string full(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + "  " : s + std::string(width - s.size() + 2, ' ');
}

/// Rows of named sequences shown for k = 0..K.
std::string sequence_table(const std::vector<std::pair<std::string, const MatrixSeq*>>& rows, int K) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"row"};
  for (int k = 0; k <= K; ++k) header.push_back("k=" + std::to_string(k));
  cells.push_back(header);
  for (const auto& [name, seq] : rows) {
    std::vector<std::string> line{name};
    for (int k = 0; k <= K; ++k) line.push_back(format_matrix(seq->at(static_cast<std::size_t>(k))));
    cells.push_back(line);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::ostringstream out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) out << (c + 1 < line.size() ? pad(line[c], width[c]) : line[c]);
    out << '\n';
  }
  return out.str();
}

std::string long_csv(const std::vector<std::pair<std::string, const MatrixSeq*>>& rows) {
  std::ostringstream out;
  out << "sequence,k,row,col,value\n";
  for (const auto& [name, seq] : rows) {
    for (std::size_t k = 0; k < seq->size(); ++k) {
      const Matrix& m = (*seq)[k];
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << name << ',' << k << ',' << r << ',' << c << ',' << full(m(r, c)) << '\n';
    }
  }
  return out.str();
}

std::string sequences_output(const Config& cfg, const std::vector<std::pair<std::string, const MatrixSeq*>>& rows,
                             int K, const std::string& table_footer) {
  if (cfg.format == "csv") {
    if (cfg.sequence.empty()) return long_csv(rows);
    for (const auto& [name, seq] : rows) {
      if (name == cfg.sequence) {
        std::ostringstream out;
        io::write_sequence_csv(out, *seq);
        return out.str();
      }
    }
    throw std::invalid_argument("unknown sequence '" + cfg.sequence + "'");
  }
  return sequence_table(rows, K) + table_footer;
}

class Runner {
 public:
  Runner(const Config& cfg, std::ostream& out, std::ostream& err) : cfg_(cfg), out_(out), err_(err) {}

  int validate() {
    const auto doc = io::load_system(cfg_.input);
    const auto report = mfh::validate(doc.system, {cfg_.psi_tol});
    if (cfg_.format == "json") {
      Json j;
      j["valid"] = report.ok();
      j["violations"] = Json::array();
      for (const auto& v : report.violations)
        j["violations"].push_back({{"stage", v.stage}, {"field", v.field}, {"message", v.message}});
      emit(j.dump(2) + "\n", "validate.json");
    } else {
      emit(report.ok() ? std::string("valid\n") : report.summary() + "\n", "validate.txt");
    }
    return report.ok() ? kOk : kInvalidInput;
  }

  int sbrl() {
    const auto doc = load();
    auto sol = unwrap(sbrl_solve(doc.system, gamma(doc), cfg_.solver));
    MatrixSeq Vt;
    for (std::size_t k = 0; k < sol.V.size(); ++k) Vt.push_back(sol.Vbb[k] - sol.V[k]);
    if (cfg_.format == "json") return emit(io::to_json(sol).dump(2) + "\n", "sbrl.json");
    const std::vector<std::pair<std::string, const MatrixSeq*>> rows{
        {"H", &sol.H}, {"Ht", &sol.Ht}, {"V", &sol.V}, {"Vt", &Vt}, {"P", &sol.P}, {"Q", &sol.Q}};
    return emit(sequences_output(cfg_, rows, doc.system.horizon(), "gamma = " + fixed(sol.gamma) + "\n"),
                cfg_.format == "csv" ? "sbrl.csv" : "sbrl.txt");
  }

  int lq() {
    const auto doc = load();
    const auto lq_system = LqSystem::from_mean_field(doc.system);
    auto sol = unwrap(lq_solve(lq_system, cfg_.solver));
    if (cfg_.format == "json") return emit(io::to_json(sol).dump(2) + "\n", "lq.json");
    const std::vector<std::pair<std::string, const MatrixSeq*>> rows{
        {"H1", &sol.H1}, {"Ht1", &sol.Ht1}, {"U", &sol.U}, {"Ut", &sol.Ut}, {"Pt", &sol.Pt}, {"Qt", &sol.Qt}};
    return emit(sequences_output(cfg_, rows, doc.system.horizon(), "optimal value = " + fixed(sol.optimal_value) + "\n"),
                cfg_.format == "csv" ? "lq.csv" : "lq.txt");
  }

  int h2hinf() {
    const auto doc = load();
    const auto sol = unwrap(h2hinf_solve(doc.system, gamma(doc), cfg_.solver));
    return emit_solution(sol, doc.system.horizon(), "h2hinf");
  }

  int gamma_search() {
    const auto doc = load();
    GammaSearchOptions opts;
    opts.solver = cfg_.solver;
    opts.scan_points = cfg_.scan_points;
    const auto result = unwrap(gamma_star_search(doc.system, cfg_.lo, cfg_.hi, cfg_.tol, opts));
    for (const auto& w : result.warnings) err_ << "warning: " << w << '\n';
    if (cfg_.format == "json") return emit(io::to_json(result).dump(2) + "\n", "gamma_search.json");
    std::ostringstream out;
    if (cfg_.format == "csv") {
      out << "quantity,value\n"
          << "gamma_star," << full(result.gamma_star) << '\n'
          << "certified_gamma," << full(result.certified_gamma) << '\n'
          << "iterations," << result.iterations << '\n'
          << "non_monotone_detected," << (result.non_monotone_detected ? 1 : 0) << '\n';
      return emit(out.str(), "gamma_search.csv");
    }
    const int feasible = static_cast<int>(std::count(result.scan_feasible.begin(), result.scan_feasible.end(), true));
    out << "gamma*            " << fixed(result.gamma_star, 6) << '\n'
        << "certified gamma   " << fixed(result.certified_gamma, 6) << '\n'
        << "iterations        " << result.iterations << '\n'
        << "scan              " << feasible << "/" << result.scan_gammas.size() << " feasible, "
        << (result.non_monotone_detected ? "non-monotone" : "monotone") << '\n'
        << "certificate       J1 value " << fixed(result.certificate.hinf_value) << ", J2 value "
        << fixed(result.certificate.h2_value) << '\n';
    return emit(out.str(), "gamma_search.txt");
  }

  int simulate() {
    const auto doc = load();
    const auto& sys = doc.system;
    const double g = cfg_.policy == "optimal" || !cfg_.particles ? gamma(doc) : 1.0;
    Policies policies;
    if (cfg_.policy == "optimal") {
      const auto sol = unwrap(h2hinf_solve(sys, g, cfg_.solver));
      policies = {sol.control_policy(), sol.disturbance_policy()};
    }
    NoiseModel noise{cfg_.noise == "rademacher" ? NoiseKind::kRademacher : NoiseKind::kGaussian, cfg_.seed};

    if (cfg_.particles) {
      ParticleOptions opts;
      opts.counts = cfg_.particle_counts;
      opts.n_reps = cfg_.reps;
      opts.noise = noise;
      opts.threads = cfg_.threads;
      const auto report = simulate_particle_system(sys, policies.control, {}, sys.x0, opts);
      if (cfg_.format == "json") return emit(io::to_json(report).dump(2) + "\n", "particles.json");
      std::ostringstream out;
      if (cfg_.format == "csv") {
        out << "particles,median,mean\n";
        for (const auto& l : report.levels) out << l.particles << ',' << full(l.median) << ',' << full(l.mean) << '\n';
        return emit(out.str(), "particles.csv");
      }
      out << pad("particles", 10) << pad("median deviation", 18) << "mean deviation\n";
      for (const auto& l : report.levels)
        out << pad(std::to_string(l.particles), 10) << pad(fixed(l.median, 6), 18) << fixed(l.mean, 6) << '\n';
      out << "median decreasing: " << (report.median_decreasing ? "yes" : "no") << '\n';
      return emit(out.str(), "particles.txt");
    }

    SimulationOptions opts;
    opts.n_paths = cfg_.paths;
    opts.noise = noise;
    opts.gamma = g;
    opts.h2_state_weight = cfg_.solver.h2_state_weight;
    opts.threads = cfg_.threads;
    const auto est = simulate_paths(sys, policies, sys.x0, opts);
    if (cfg_.format == "json") return emit(io::to_json(est).dump(2) + "\n", "simulate.json");
    std::ostringstream out;
    if (cfg_.format == "csv") {
      io::write_estimate_csv(out, est);
      return emit(out.str(), "simulate.csv");
    }
    const auto exact = propagate_moments(sys, policies, sys.x0);
    const auto costs = evaluate_costs(sys, policies, sys.x0, g);
    out << "paths " << est.n_paths << ", seed " << est.seed << ", noise " << to_string(est.noise) << "\n\n";
    out << pad("quantity", 16) << pad("exact", 10) << pad("estimate", 10) << pad("se", 10) << "z\n";
    auto line = [&](const std::string& name, double exact_value, double mean, double se) {
      const std::string z = se > 0 ? fixed((mean - exact_value) / se, 2) : "-";
      out << pad(name, 16) << pad(fixed(exact_value), 10) << pad(fixed(mean), 10) << pad(fixed(se), 10) << z << '\n';
    };
    line("J1", costs.jk, est.jk.mean, est.jk.se);
    line("J2", costs.h2_criterion(opts.h2_state_weight), est.h2_criterion.mean, est.h2_criterion.se);
    line("sum E|z|^2", costs.j2, est.j2.mean, est.j2.se);
    for (std::size_t k = 0; k < est.mean_hat.size(); ++k) {
      for (Eigen::Index i = 0; i < est.mean_hat[k].size(); ++i)
        line("Ex" + std::to_string(i) + "(" + std::to_string(k) + ")", exact.mean[k](i), est.mean_hat[k](i), est.mean_se[k](i));
    }
    for (std::size_t k = 0; k < est.cov_hat.size(); ++k) {
      for (Eigen::Index r = 0; r < est.cov_hat[k].rows(); ++r)
        for (Eigen::Index c = r; c < est.cov_hat[k].cols(); ++c)
          line("Y" + std::to_string(r) + std::to_string(c) + "(" + std::to_string(k) + ")", exact.cov[k](r, c),
               est.cov_hat[k](r, c), est.cov_se[k](r, c));
    }
    return emit(out.str(), "simulate.txt");
  }

  int verify() {
    const auto doc = load();
    const auto sol = unwrap(h2hinf_solve(doc.system, gamma(doc), cfg_.solver));
    VerifyOptions opts;
    opts.seed = cfg_.seed;
    opts.perturbations = cfg_.perturbations;
    opts.norm_policies = cfg_.norm_policies;
    const auto report = verify_solution(doc.system, sol, opts);
    std::ostringstream out;
    if (cfg_.format == "csv") {
      write_verification_csv(out, report);
    } else if (cfg_.format == "json") {
      Json j = Json::array();
      for (const auto& r : report.results)
        j.push_back({{"property", r.property}, {"status", r.pass ? "PASS" : "FAIL"}, {"measured", r.measured},
                     {"threshold", r.threshold}, {"detail", r.detail}});
      out << j.dump(2) << '\n';
    } else {
      for (const auto& r : report.results) {
        out << (r.pass ? "PASS " : "FAIL ") << pad(r.property, 30) << "measured " << std::setprecision(6)
            << std::scientific << r.measured << "  threshold " << r.threshold << std::defaultfloat;
        if (!r.detail.empty()) out << "  (" << r.detail << ")";
        out << '\n';
      }
    }
    emit(out.str(), cfg_.format == "table" ? "verify.txt" : "verify." + cfg_.format);
    return report.ok() ? kOk : kVerificationFailed;
  }

  int reproduce() {
    const MeanFieldSystem sys = cfg_.input.empty() ? reference::system() : load().system;
    const double g = cfg_.gamma.value_or(reference::kGamma);
    const auto sol = unwrap(h2hinf_solve(sys, g, cfg_.solver));
    const auto deviations = reference::compare_to_golden(sol);
    bool all = true;
    for (const auto& d : deviations) all = all && d.max_abs <= reference::kGoldenTolerance;

    if (cfg_.format == "json") {
      Json j = io::to_json(sol);
      j["golden"] = Json::array();
      for (const auto& d : deviations)
        j["golden"].push_back({{"row", d.name}, {"max_abs_deviation", d.max_abs},
                               {"pass", d.max_abs <= reference::kGoldenTolerance}});
      j["pass"] = all;
      emit(j.dump(2) + "\n", "reproduce.json");
    } else if (cfg_.format == "csv") {
      std::ostringstream out;
      out << "row,status,max_abs_deviation,tolerance\n";
      for (const auto& d : deviations)
        out << d.name << ',' << (d.max_abs <= reference::kGoldenTolerance ? "PASS" : "FAIL") << ',' << full(d.max_abs)
            << ',' << reference::kGoldenTolerance << '\n';
      emit(out.str(), "reproduce.csv");
    } else {
      std::vector<std::pair<std::string, const MatrixSeq*>> rows;
      for (const auto& name : H2HinfSolution::sequence_names()) rows.emplace_back(name, &sol.sequence(name));
      std::ostringstream out;
      out << sequence_table(rows, sol.horizon()) << '\n';
      for (const auto& d : deviations)
        out << (d.max_abs <= reference::kGoldenTolerance ? "PASS " : "FAIL ") << pad(d.name, 4) << "max deviation "
            << std::scientific << std::setprecision(2) << d.max_abs << std::defaultfloat << '\n';
      out << "\nJ1 value x0'Q1(0)x0  = " << fixed(sol.hinf_value) << '\n'
          << "J2 value x0'Qt1(0)x0 = " << fixed(sol.h2_value) << '\n';
      emit(out.str(), "reproduce.txt");
    }
    return all ? kOk : kVerificationFailed;
  }

 private:
  io::SystemDocument load() const {
    auto doc = io::load_system(cfg_.input);
    const auto report = mfh::validate(doc.system, {cfg_.psi_tol});
    if (!report.ok()) throw DimensionError(report.summary());
    return doc;
  }

  double gamma(const io::SystemDocument& doc) const {
    if (cfg_.gamma) return *cfg_.gamma;
    if (doc.gamma) return *doc.gamma;
    throw std::invalid_argument("no gamma: pass --gamma or set \"gamma\" in the input");
  }

  template <typename T>
  T unwrap(Outcome<T> outcome) const {
    if (!outcome) throw Infeasible{outcome.failure()};
    return std::move(outcome).value();
  }

  int emit_solution(const H2HinfSolution& sol, int K, const std::string& stem) {
    if (cfg_.format == "json") return emit(io::to_json(sol).dump(2) + "\n", stem + ".json");
    std::vector<std::pair<std::string, const MatrixSeq*>> rows;
    for (const auto& name : H2HinfSolution::sequence_names()) rows.emplace_back(name, &sol.sequence(name));
    const std::string footer = "gamma = " + fixed(sol.gamma) + ", J1 value = " + fixed(sol.hinf_value) +
                               ", J2 value = " + fixed(sol.h2_value) + "\n";
    return emit(sequences_output(cfg_, rows, K, footer), stem + (cfg_.format == "csv" ? ".csv" : ".txt"));
  }

  int emit(const std::string& text, const std::string& default_name) {
    std::string path = cfg_.output;
    if (path.empty()) {
      if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
        std::filesystem::create_directories(dir);
        path = (std::filesystem::path(dir) / default_name).string();
      }
    }
    if (path.empty()) {
      out_ << text;
    } else {
      io::write_text_file(path, text);
      err_ << "wrote " << path << '\n';
    }
    return kOk;
  }

  const Config& cfg_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

std::string format_matrix(const Matrix& m, int decimals) {
  std::ostringstream s;
  s << '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    s << (r ? ", [" : "[");
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      // Avoid printing "-0.0000".
      const double v = std::abs(m(r, c)) < 0.5 * std::pow(10.0, -decimals) ? 0.0 : m(r, c);
      s << (c ? ", " : "") << fixed(v, decimals);
    }
    s << ']';
  }
  s << ']';
  return s.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Finite-horizon mixed H2/Hinf synthesis for mean-field stochastic systems"};
  app.require_subcommand(1);

  auto add_input = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("-i,--input", cfg.input, "System JSON file")->check(CLI::ExistingFile);
    if (required) opt->required();
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("-f,--format", cfg.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
    cmd->add_option("-o,--output", cfg.output, std::string("Output file (default: stdout, or $") + kOutputDirEnv + ")");
  };
  auto add_solver = [&](CLI::App* cmd) {
    cmd->add_option("--pd-tol", cfg.solver.pd_tol, "Positive-definiteness threshold");
    cmd->add_option("--cond-tol", cfg.solver.cond_tol, "Reciprocal condition threshold of coupled gain systems");
    cmd->add_option("--psi-tol", cfg.psi_tol, "Tolerance of the Psi'Psi = I check");
    cmd->add_option("--h2-state-weight", cfg.solver.h2_state_weight, "Weight w of the state term in the H2 criterion");
  };
  auto add_gamma = [&](CLI::App* cmd) {
    cmd->add_option("-g,--gamma", cfg.gamma, "Attenuation level (overrides the input file)")->check(CLI::PositiveNumber);
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check dimensions, finiteness and Psi'Psi = I");
  add_input(validate, true);
  add_format(validate);
  validate->add_option("--psi-tol", cfg.psi_tol, "Tolerance of the Psi'Psi = I check");

  auto* sbrl = app.add_subcommand("sbrl", "Bounded-real recursion for the uncontrolled system");
  auto* lq = app.add_subcommand("lq", "Mean-field LQ recursion (disturbance dropped, noise channel C, Ct)");
  auto* h2hinf = app.add_subcommand("h2hinf", "Coupled H2/Hinf recursion and gains");
  for (auto* cmd : {sbrl, lq, h2hinf}) {
    add_input(cmd, true);
    add_format(cmd);
    add_solver(cmd);
    cmd->add_option("--sequence", cfg.sequence, "With --format csv: emit one sequence as k,row,col,value");
  }
  add_gamma(sbrl);
  add_gamma(h2hinf);

  auto* search = app.add_subcommand("gamma-search", "Bisection for the smallest certified gamma");
  add_input(search, true);
  add_format(search);
  add_solver(search);
  search->add_option("--lo", cfg.lo, "Lower end of the bracket")->capture_default_str();
  search->add_option("--hi", cfg.hi, "Upper end of the bracket")->capture_default_str();
  search->add_option("--tol", cfg.tol, "Bracket width at termination")->capture_default_str();
  search->add_option("--scan-points", cfg.scan_points, "Grid size of the monotonicity scan")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths or the finite-particle system");
  add_input(simulate, true);
  add_format(simulate);
  add_solver(simulate);
  add_gamma(simulate);
  add_seed(simulate);
  simulate->add_option("--paths", cfg.paths, "Number of paths")->capture_default_str()->check(CLI::Range(2, 1 << 30));
  simulate->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--noise", cfg.noise, "Noise distribution")->check(CLI::IsMember({"gaussian", "rademacher"}));
  simulate->add_option("--policy", cfg.policy, "optimal: (u*, v*); zero: open channels")
      ->check(CLI::IsMember({"optimal", "zero"}));
  simulate->add_flag("--particles", cfg.particles, "Run the finite-particle system instead");
  simulate->add_option("--particle-counts", cfg.particle_counts, "Particle counts")->delimiter(',');
  simulate->add_option("--reps", cfg.reps, "Repetitions per particle count")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Check residuals, sign structure, saddle and gain properties");
  add_input(verify, true);
  add_format(verify);
  add_solver(verify);
  add_gamma(verify);
  add_seed(verify);
  verify->add_option("--perturbations", cfg.perturbations, "Random perturbations per saddle check")->capture_default_str();
  verify->add_option("--norm-policies", cfg.norm_policies, "Sampled disturbance policies")->capture_default_str();

  auto* reproduce = app.add_subcommand("reproduce-paper-example", "Solve the bundled two-step example and compare to the published table");
  add_input(reproduce, false);
  add_format(reproduce);
  add_solver(reproduce);
  add_gamma(reproduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  Runner runner(cfg, out, err);
  const std::vector<std::pair<CLI::App*, std::function<int()>>> handlers{
      {validate, [&] { return runner.validate(); }},   {sbrl, [&] { return runner.sbrl(); }},
      {lq, [&] { return runner.lq(); }},               {h2hinf, [&] { return runner.h2hinf(); }},
      {search, [&] { return runner.gamma_search(); }}, {simulate, [&] { return runner.simulate(); }},
      {verify, [&] { return runner.verify(); }},       {reproduce, [&] { return runner.reproduce(); }}};
  try {
    for (const auto& [cmd, handler] : handlers)
      if (cmd->parsed()) return handler();
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.failure.describe() << '\n';
    return kInfeasible;
  } catch (const SingularCouplingError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ParseError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace mfh::cli
