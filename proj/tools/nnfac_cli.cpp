// nnfac: solve nuclear-norm regularized programs through the factored
// reformulation, certify the landscape trichotomy on an instance, and
// generate reproducible synthetic instances.
//
// Exit codes: 0 success, 1 certification/computation failure, 2 input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nnfac/conditioning.hpp"
#include "nnfac/convex.hpp"
#include "nnfac/csv.hpp"
#include "nnfac/errors.hpp"
#include "nnfac/instance_gen.hpp"
#include "nnfac/landscape.hpp"
#include "nnfac/rng.hpp"
#include "nnfac/solvers.hpp"

namespace fs = std::filesystem;
using nnfac::Matrix;
using nnfac::Vector;
using ordered_json = nlohmann::ordered_json;

namespace {

struct LoadedConfig {
  nnfac::Problem problem;
  std::uint64_t seed = 0;
  nnfac::SolverConfig solver;
  double oracle_step = 0.0;
  double oracle_tol = 1e-9;
  long oracle_max_iters = 200000;
  nnfac::CertifyOptions certify;
  int certify_seeds = 20;
  ordered_json raw;
};

// Paths in a config are relative to the config file itself.
std::string resolve(const fs::path& base, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p.string() : (base / p).string();
}

nnfac::LossPtr load_loss(const ordered_json& loss_json, const fs::path& base) {
  const std::string kind = loss_json.at("kind").get<std::string>();
  if (kind == "identity") {
    return std::make_shared<nnfac::IdentityQuadraticLoss>(
        nnfac::load_matrix_csv(resolve(base, loss_json.at("target"))));
  }
  if (kind == "weighted") {
    return std::make_shared<nnfac::WeightedFrobeniusLoss>(
        nnfac::load_matrix_csv(resolve(base, loss_json.at("weights"))),
        nnfac::load_matrix_csv(resolve(base, loss_json.at("target"))));
  }
  if (kind == "completion") {
    const auto shape = loss_json.at("shape");
    return std::make_shared<nnfac::MaskedCompletionLoss>(
        shape.at(0).get<Eigen::Index>(), shape.at(1).get<Eigen::Index>(),
        nnfac::load_index_pairs_csv(resolve(base, loss_json.at("mask"))),
        nnfac::load_column_csv(resolve(base, loss_json.at("values"))));
  }
  if (kind == "sensing") {
    return std::make_shared<nnfac::QuadraticSensingLoss>(
        nnfac::load_matrix_csv(resolve(base, loss_json.at("matrices"))),
        nnfac::load_column_csv(resolve(base, loss_json.at("observations"))));
  }
  throw std::invalid_argument("unknown loss kind '" + kind + "'");
}

template <typename T>
void maybe(const ordered_json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw nnfac::ParseError(path, 0, "cannot open config");
  }
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw nnfac::ParseError(path, static_cast<long>(e.byte), e.what());
  }
  const fs::path base = fs::path(path).parent_path();

  nnfac::LossPtr loss = load_loss(doc.at("loss"), base);
  const double lambda = doc.at("lambda").get<double>();
  const Eigen::Index rank = doc.at("rank").get<Eigen::Index>();

  LoadedConfig out{nnfac::Problem(std::move(loss), lambda, rank)};
  maybe(doc, "seed", out.seed);
  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    maybe(s, "init_scale", out.solver.init_scale);
    maybe(s, "grad_tol", out.solver.grad_tol);
    maybe(s, "max_iters", out.solver.max_iters);
    maybe(s, "backtrack_factor", out.solver.backtrack_factor);
    maybe(s, "armijo_constant", out.solver.armijo_constant);
    maybe(s, "initial_step", out.solver.initial_step);
    maybe(s, "perturb_trigger_tol", out.solver.perturb_trigger_tol);
    maybe(s, "perturb_radius", out.solver.perturb_radius);
    maybe(s, "m_hat", out.solver.m_hat);
  }
  if (doc.contains("oracle")) {
    const auto& o = doc["oracle"];
    maybe(o, "step", out.oracle_step);
    maybe(o, "tol", out.oracle_tol);
    maybe(o, "max_iters", out.oracle_max_iters);
  }
  if (doc.contains("certify")) {
    const auto& c = doc["certify"];
    maybe(c, "seeds", out.certify_seeds);
    maybe(c, "lemma_trials", out.certify.lemma_trials);
    maybe(c, "condition_trials", out.certify.condition_trials);
    maybe(c, "prop3_trials", out.certify.prop3_trials);
    maybe(c, "crit_tol", out.certify.crit_tol);
    maybe(c, "certify_slack", out.certify.certify_slack);
    maybe(c, "oracle_step", out.certify.oracle_step);
    maybe(c, "oracle_tol", out.certify.oracle_tol);
    maybe(c, "oracle_max_iters", out.certify.oracle_max_iters);
    maybe(c, "solver_grad_tol", out.certify.solver_grad_tol);
    maybe(c, "solver_max_iters", out.certify.solver_max_iters);
    maybe(c, "polish_grad_tol", out.certify.polish_grad_tol);
  }
  out.raw = std::move(doc);
  return out;
}

void ensure_dir(const std::string& dir) {
  fs::create_directories(dir);
}

ordered_json solver_settings_json(const nnfac::SolverConfig& c) {
  return {{"init_scale", c.init_scale},
          {"grad_tol", c.grad_tol},
          {"max_iters", c.max_iters},
          {"backtrack_factor", c.backtrack_factor},
          {"armijo_constant", c.armijo_constant},
          {"initial_step", c.initial_step},
          {"perturb_trigger_tol", c.perturb_trigger_tol},
          {"perturb_radius", c.perturb_radius},
          {"m_hat", c.m_hat},
          {"rng_seed", c.rng_seed}};
}

int cmd_solve(const std::string& config_path, const std::string& out_dir,
              bool plain_descent) {
  LoadedConfig cfg = load_config(config_path);
  ensure_dir(out_dir);
  cfg.solver.rng_seed = cfg.seed;
  if (cfg.solver.init_scale <= 0.0) {
    cfg.solver.init_scale = nnfac::default_init_scale(cfg.problem);
  }
  const nnfac::StackedFactor w0 =
      nnfac::random_init(cfg.problem.p(), cfg.problem.q(), cfg.problem.rank(),
                         cfg.solver.init_scale, cfg.seed);
  const nnfac::SolveResult result =
      plain_descent ? nnfac::gradient_descent(cfg.problem, w0, cfg.solver)
                    : nnfac::perturbed_gradient_descent(cfg.problem, w0,
                                                        cfg.solver);

  nnfac::save_matrix_csv(out_dir + "/U.csv", result.w.U());
  nnfac::save_matrix_csv(out_dir + "/V.csv", result.w.V());

  std::string trace = "iter,g_value,grad_norm,step_size,balance_residual\n";
  char line[192];
  for (const auto& rec : result.trace.records) {
    std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g,%.17g,%.17g\n",
                  rec.iter, rec.g_value, rec.grad_norm, rec.step_size,
                  rec.balance_residual);
    trace += line;
  }
  nnfac::write_text_atomic(out_dir + "/trace.csv", trace);

  const auto& last = result.trace.records.back();
  ordered_json report;
  report["command"] = plain_descent ? "solve (gradient_descent)"
                                    : "solve (perturbed_gradient_descent)";
  report["rng_algorithm"] = nnfac::Rng::kAlgorithm;
  report["seed"] = cfg.seed;
  report["solver"] = solver_settings_json(cfg.solver);
  report["status"] = nnfac::to_string(result.trace.status);
  report["iterations"] = result.trace.records.size();
  report["perturbations"] = result.trace.perturbations;
  report["g_value"] = last.g_value;
  report["grad_norm"] = last.grad_norm;
  report["balance_residual"] = last.balance_residual;
  report["config"] = cfg.raw;
  nnfac::write_text_atomic(out_dir + "/solve_report.json", report.dump(2) + "\n");

  std::cout << "solve: " << nnfac::to_string(result.trace.status) << " after "
            << result.trace.records.size() << " iterations, grad norm "
            << last.grad_norm << "\n";
  return result.trace.status == nnfac::SolveStatus::Converged ? 0 : 1;
}

int cmd_oracle(const std::string& config_path, const std::string& out_dir) {
  LoadedConfig cfg = load_config(config_path);
  ensure_dir(out_dir);
  const nnfac::ConvexSolution sol = nnfac::solve_convex(
      cfg.problem, cfg.oracle_step, cfg.oracle_tol, cfg.oracle_max_iters);
  nnfac::save_matrix_csv(out_dir + "/X_star.csv", sol.x_star);

  ordered_json report;
  report["command"] = "oracle";
  report["seed"] = cfg.seed;
  report["tolerances"] = {{"step", cfg.oracle_step},
                          {"tol", cfg.oracle_tol},
                          {"max_iters", cfg.oracle_max_iters}};
  report["rank_star"] = sol.rank_star;
  report["iterations"] = sol.iterations;
  report["objective"] = sol.objective;
  report["kkt_spectral_slack"] = sol.kkt_spectral_slack;
  report["subgradient_residual"] = sol.subgradient_residual;
  report["kkt_pass"] = sol.kkt_pass;
  report["config"] = cfg.raw;
  nnfac::write_text_atomic(out_dir + "/kkt_report.json", report.dump(2) + "\n");

  std::cout << "oracle: rank " << sol.rank_star << ", kkt "
            << (sol.kkt_pass ? "pass" : "FAIL") << ", objective "
            << sol.objective << "\n";
  return sol.kkt_pass ? 0 : 1;
}

int cmd_certify(const std::string& config_path, const std::string& out_dir,
                int seeds_override) {
  LoadedConfig cfg = load_config(config_path);
  ensure_dir(out_dir);
  const int seeds = seeds_override > 0 ? seeds_override : cfg.certify_seeds;
  const nnfac::CertificationBundle bundle =
      nnfac::certify_landscape(cfg.problem, seeds, cfg.seed, cfg.certify);
  nnfac::write_text_atomic(out_dir + "/certify_report.json",
                           nnfac::bundle_to_json(bundle, cfg.raw.dump()));
  std::cout << "certify: conditioning "
            << (bundle.condition_pass ? "PASS" : "FAIL") << " (ratio "
            << bundle.condition.ratio() << "), " << bundle.n_global
            << " global / " << bundle.n_saddle << " saddle / "
            << bundle.n_not_critical << " not-critical / "
            << bundle.n_indeterminate << " indeterminate, overall "
            << (bundle.all_pass ? "PASS" : "FAIL") << "\n";
  return bundle.all_pass ? 0 : 1;
}

int cmd_check_conditioning(const std::string& config_path, int trials,
                           const std::string& out_dir) {
  LoadedConfig cfg = load_config(config_path);
  const nnfac::ConditionEstimate est = nnfac::estimate_restricted_condition(
      cfg.problem.loss(), cfg.problem.rank(), trials, cfg.seed);
  const bool pass = est.ratio() <= 1.5;

  ordered_json report;
  report["command"] = "check-conditioning";
  report["rng_algorithm"] = nnfac::Rng::kAlgorithm;
  report["seed"] = cfg.seed;
  report["trials"] = trials;
  report["m_hat"] = est.m_hat;
  report["M_hat"] = est.M_hat;
  report["ratio"] = est.ratio();
  report["verdict"] = pass ? "PASS" : "FAIL";
  report["config"] = cfg.raw;
  const std::string text = report.dump(2) + "\n";
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    nnfac::write_text_atomic(out_dir + "/conditioning.json", text);
  }
  std::cout << text;
  return 0;
}

int cmd_gen(const std::string& kind, Eigen::Index p, Eigen::Index q,
            Eigen::Index rank, Eigen::Index n, std::uint64_t seed,
            double lambda, Eigen::Index factor_rank,
            const std::string& out_dir) {
  if (kind != "sensing") {
    throw std::invalid_argument("gen: unsupported kind '" + kind +
                                "' (only 'sensing')");
  }
  ensure_dir(out_dir);
  const nnfac::SensingInstance inst =
      nnfac::generate_sensing_instance(p, q, rank, n, seed);
  nnfac::save_matrix_csv(out_dir + "/A_stack.csv", inst.sensing_stack);
  nnfac::save_matrix_csv(out_dir + "/b.csv", inst.observations);
  nnfac::save_matrix_csv(out_dir + "/X_true.csv", inst.x_true);

  ordered_json config;
  config["loss"] = {{"kind", "sensing"},
                    {"matrices", "A_stack.csv"},
                    {"observations", "b.csv"}};
  config["lambda"] = lambda > 0.0 ? lambda : inst.lambda_suggested;
  config["rank"] = factor_rank > 0 ? factor_rank : rank + 1;
  config["seed"] = seed;
  config["generator"] = {{"kind", "sensing"},
                         {"p", p},
                         {"q", q},
                         {"rank_true", rank},
                         {"n", n},
                         {"seed", seed},
                         {"rng_algorithm", nnfac::Rng::kAlgorithm},
                         {"ground_truth", "X_true.csv"}};
  nnfac::write_text_atomic(out_dir + "/config.json", config.dump(2) + "\n");
  std::cout << "gen: wrote sensing instance (p=" << p << ", q=" << q
            << ", rank=" << rank << ", n=" << n << ") to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factored nuclear-norm solver and landscape certifier"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int seeds_override = 0;
  int trials = 1000;
  bool plain_descent = false;

  auto* solve = app.add_subcommand("solve", "Run the factored solver");
  solve->add_option("--config", config_path, "JSON config")->required();
  solve->add_option("--out", out_dir, "output directory");
  solve->add_flag("--plain", plain_descent,
                  "plain gradient descent (no saddle escapes)");

  auto* oracle = app.add_subcommand("oracle", "Solve the convex program");
  oracle->add_option("--config", config_path, "JSON config")->required();
  oracle->add_option("--out", out_dir, "output directory");

  auto* certify =
      app.add_subcommand("certify", "Certify the landscape on this instance");
  certify->add_option("--config", config_path, "JSON config")->required();
  certify->add_option("--seeds", seeds_override, "number of solver seeds");
  certify->add_option("--out", out_dir, "output directory");

  auto* check = app.add_subcommand("check-conditioning",
                                   "Sample the restricted conditioning");
  check->add_option("--config", config_path, "JSON config")->required();
  check->add_option("--trials", trials, "sampling trials");
  std::string check_out;
  check->add_option("--out", check_out, "optional output directory");

  std::string gen_kind = "sensing";
  Eigen::Index gen_p = 30, gen_q = 30, gen_rank = 2, gen_n = 300,
               gen_factor_rank = 0;
  std::uint64_t gen_seed = 0;
  double gen_lambda = 0.0;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance");
  gen->add_option("--kind", gen_kind, "instance kind (sensing)");
  gen->add_option("--p", gen_p, "rows");
  gen->add_option("--q", gen_q, "cols");
  gen->add_option("--rank", gen_rank, "ground-truth rank");
  gen->add_option("--n", gen_n, "number of measurements");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--lambda", gen_lambda,
                  "regularization weight (default: scaled to the instance)");
  gen->add_option("--factor-rank", gen_factor_rank,
                  "factor rank for the emitted config (default rank+1)");
  gen->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(config_path, out_dir, plain_descent);
    if (oracle->parsed()) return cmd_oracle(config_path, out_dir);
    if (certify->parsed())
      return cmd_certify(config_path, out_dir, seeds_override);
    if (check->parsed())
      return cmd_check_conditioning(config_path, trials, check_out);
    if (gen->parsed())
      return cmd_gen(gen_kind, gen_p, gen_q, gen_rank, gen_n, gen_seed,
                     gen_lambda, gen_factor_rank, out_dir);
  } catch (const nnfac::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
