// opent command-line driver.
//
// Exit codes: 0 success, 1 configuration error, 2 violated bound.

#include "opent/opent.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace ex = opent::experiments;

namespace {

using ex::Table;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool heavy = false;
  bool svg = false;
  std::optional<int> workers;
  std::vector<std::string> models;
  std::vector<int> n_sites;
  std::optional<int> layers;
  std::optional<int> site;
  std::optional<std::string> pauli;
  std::vector<double> alphas;
  std::vector<int> chis;
};

/// Config file first, then flags.
ex::ExperimentConfig build_config(const CommonOptions& o, std::optional<ex::ExperimentKind> kind) {
  std::map<std::string, std::string> kv;
  if (!o.config_path.empty()) kv = ex::read_key_value_file(o.config_path);
  if (kind) kv["experiment"] = ex::to_string(*kind);
  const bool explicit_n = kv.count("n_sites") > 0 || !o.n_sites.empty();
  ex::ExperimentConfig cfg = ex::config_from_keys(kv, kind);
  if (o.heavy) cfg.heavy = true;
  if (cfg.heavy && !explicit_n) {
    if (cfg.experiment == ex::ExperimentKind::fig2_left || cfg.experiment == ex::ExperimentKind::fig2_right) {
      cfg.n_sites_list = {12};
    } else if (cfg.experiment == ex::ExperimentKind::fig4_loe) {
      cfg.n_sites_list = {10};
    }
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.svg) cfg.svg = true;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.models.empty()) {
    std::string joined;
    for (const auto& m : o.models) joined += (joined.empty() ? "" : ",") + m;
    ex::apply_key(cfg, "models", joined);
  }
  if (!o.n_sites.empty()) cfg.n_sites_list = o.n_sites;
  if (o.layers) cfg.max_layers = *o.layers;
  if (o.site) cfg.initial_site = *o.site;
  if (o.pauli) ex::apply_key(cfg, "initial_pauli", *o.pauli);
  if (!o.alphas.empty()) cfg.alpha_grid = o.alphas;
  if (!o.chis.empty()) cfg.chi_grid = o.chis;
  cfg.validate();
  return cfg;
}

void emit(const ex::RunResult& res, const ex::ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  for (const auto& t : res.tables) {
    const auto path = ex::write_csv(t, dir);
    std::cout << "wrote " << path.string() << " (" << t.rows.size() << " rows)\n";
    if (cfg.svg) {
      for (const auto& [name, body] : ex::svg::plots_for(t)) {
        ex::write_file_atomic(dir / name, body);
        std::cout << "wrote " << (dir / name).string() << "\n";
      }
    }
  }
  for (const auto& f : res.flags) std::cout << "flag: " << f << "\n";
}

/// Returns the exit code for a finished run after the validator pass.
int finish(const ex::RunResult& res, const ex::ExperimentConfig& cfg) {
  emit(res, cfg);
  const auto issues = ex::validate_result(res);
  for (const auto& i : issues) std::cerr << "invalid: " << i << "\n";
  return issues.empty() ? 0 : 2;
}

ex::RunResult run_evolve(const ex::ExperimentConfig& cfg) {
  Table t{"evolve",
          {"model", "N", "t", "hs_norm", "hermiticity_defect", "spectrum_deviation", "half_chain_loe", "cone_lo",
           "cone_hi"},
          {},
          {ex::header_comment(cfg, "evolve")}};
  for (const auto& c : ex::model_cells(cfg)) {
    const auto op0 = ex::initial_operator(cfg, c.n_sites, cfg.initial_pauli);
    const Eigen::VectorXd spec0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(op0.matrix()).eigenvalues();
    const int site = cfg.site_for(c.n_sites);
    opent::evolve_each(
        op0, c.model, cfg.max_layers,
        [&](const opent::EvolutionState& s) {
          const Eigen::VectorXd spec =
              Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(s.op.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
          const auto cone = opent::light_cone_support(s.layers_applied, site, c.n_sites, cfg.first_layer_odd);
          t.add(Table::RowBuilder{} << c.model.name() << c.n_sites << s.layers_applied << s.op.hs_norm()
                                    << s.op.hermiticity_defect() << (spec - spec0).cwiseAbs().maxCoeff()
                                    << opent::loe(s.op, opent::Bipartition::half_chain(c.n_sites), 1.0) << cone.lo
                                    << cone.hi);
        },
        site, cfg.first_layer_odd);
  }
  return {{std::move(t)}, {}, {}};
}

ex::RunResult run_loe(const ex::ExperimentConfig& cfg, bool bits) {
  Table t{"loe", {"model", "N", "t", "cut", "alpha", "loe"}, {}, {ex::header_comment(cfg, "loe")}};
  if (bits) t.columns.push_back("loe_bits");
  std::vector<double> alphas = cfg.alpha_grid;
  if (std::find(alphas.begin(), alphas.end(), 1.0) == alphas.end()) alphas.push_back(1.0);
  std::sort(alphas.begin(), alphas.end());
  for (const auto& c : ex::model_cells(cfg)) {
    opent::evolve_each(
        ex::initial_operator(cfg, c.n_sites, cfg.initial_pauli), c.model, cfg.max_layers,
        [&](const opent::EvolutionState& s) {
          const auto prof = opent::renyi_profile(s.op, c.model.name(), alphas);
          for (const auto& [key, value] : prof.entries) {
            Table::RowBuilder r;
            r << c.model.name() << c.n_sites << s.layers_applied << key.first << key.second << value;
            if (bits) r << opent::nats_to_bits(value);
            t.add(r);
          }
        },
        cfg.site_for(c.n_sites), cfg.first_layer_odd);
  }
  return {{std::move(t)}, {}, {}};
}

ex::RunResult run_truncate(const ex::ExperimentConfig& cfg, bool threshold, bool mpo, const std::string& export_json) {
  Table t{"truncate",
          {"model", "N", "t", "mode", "chi", "tail_sum", "lambda_next", "spectral_error", "hs_error",
           "stitching_bound", "rank_certified"},
          {},
          {ex::header_comment(cfg, "truncate")}};
  std::optional<opent::DenseOperator> last_approx;
  for (const auto& c : ex::model_cells(cfg)) {
    const opent::Bipartition half = opent::Bipartition::half_chain(c.n_sites);
    opent::evolve_each(
        ex::initial_operator(cfg, c.n_sites, cfg.initial_pauli), c.model, cfg.max_layers,
        [&](const opent::EvolutionState& s) {
          std::vector<Eigen::Index> chis;
          const auto sd = opent::schmidt_decompose(s.op, half);
          if (threshold) {
            chis.push_back(opent::threshold_rank(sd.lambdas(), cfg.cutoff));
          } else {
            for (int x : cfg.chi_grid) chis.push_back(std::min<Eigen::Index>(x, sd.length()));
          }
          for (auto chi : chis) {
            if (mpo && chi >= 1) {
              const auto res = opent::mpo_approximate(s.op, chi);
              t.add(Table::RowBuilder{} << c.model.name() << c.n_sites << s.layers_applied << "mpo"
                                        << static_cast<long>(chi) << res.total.tail_sum << res.total.lambda_next
                                        << res.total.spectral_error << res.total.hs_error_normalized
                                        << res.stitching_bound / std::sqrt(static_cast<double>(s.op.dim()))
                                        << res.rank_certified);
              if (s.layers_applied == cfg.max_layers) last_approx = res.op;
            } else {
              const auto tr = opent::truncate_single_cut(sd, s.op, chi);
              t.add(Table::RowBuilder{} << c.model.name() << c.n_sites << s.layers_applied << "single_cut"
                                        << static_cast<long>(chi) << tr.report.tail_sum << tr.report.lambda_next
                                        << tr.report.spectral_error << tr.report.hs_error_normalized
                                        << tr.report.hs_error_normalized << true);
              if (s.layers_applied == cfg.max_layers && chi >= 1) last_approx = tr.op;
            }
          }
        },
        cfg.site_for(c.n_sites), cfg.first_layer_odd);
  }
  if (!export_json.empty()) {
    if (!last_approx) throw opent::ConfigError("--export-json: no approximation at the final layer");
    const auto tensors = opent::export_mpo(*last_approx);
    ex::write_file_atomic(export_json, tensors.to_json().dump(1));
    std::cout << "wrote " << export_json << "\n";
  }
  return {{std::move(t)}, {}, {}};
}

ex::RunResult run_otoc(const ex::ExperimentConfig& cfg) {
  Table t{"otoc",
          {"model", "N", "t", "k", "chi", "alpha", "otoc_exact", "otoc_approx", "abs_delta", "thm3_bound",
           "telescope_residual", "satisfied"},
          {},
          {ex::header_comment(cfg, "otoc")}};
  ex::RunResult res;
  double alpha = 0.5;
  for (double a : cfg.alpha_grid) {
    if (a > 0.0 && a < 1.0) {
      alpha = a;
      break;
    }
  }
  for (const auto& c : ex::model_cells(cfg)) {
    opent::evolve_each(
        ex::initial_operator(cfg, c.n_sites, cfg.initial_pauli), c.model, cfg.max_layers,
        [&](const opent::EvolutionState& s) {
          std::mt19937_64 rng(ex::cell_seed(cfg.seed, c, s.layers_applied));
          const auto x = opent::random_pauli_string(c.n_sites, rng);
          const double ea = opent::loe_max_over_cuts(s.op, alpha).value;
          for (int chi : cfg.chi_grid) {
            opent::MpoOptions opts;
            opts.compute_spectral = false;
            opts.verify_rank = false;
            const auto approx = opent::mpo_approximate(s.op, chi, opts).op;
            const double norm = opent::spectral_norm(approx);
            for (int k : cfg.otoc_orders) {
              const double exact = opent::otoc(s.op, x, k).value;
              const double appr = opent::otoc(approx, x, k).value;
              const double bound = opent::thm3_bound(ea, alpha, chi, c.n_sites, k, norm);
              auto chk = opent::BoundCheck::make(opent::Theorem::T3, std::abs(exact - appr), bound);
              t.add(Table::RowBuilder{} << c.model.name() << c.n_sites << s.layers_applied << k << chi << alpha
                                        << exact << appr << chk.lhs << bound
                                        << opent::otoc_telescope_check(s.op, approx, x, k) << chk.satisfied);
              res.checks.push_back(chk);
            }
          }
        },
        cfg.site_for(c.n_sites), cfg.first_layer_odd);
  }
  // The validator keys on the table name.
  for (const auto& chk : res.checks) {
    if (!chk.satisfied) res.flags.push_back("T3 bound violated");
  }
  res.tables.push_back(std::move(t));
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-entanglement truncation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions o;
  app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--out", o.out, "Output directory");
  app.add_flag("--heavy", o.heavy, "Allow N = 10, 12");
  app.add_flag("--svg", o.svg, "Also write SVG plots");
  app.add_option("--workers", o.workers, "Concurrent (model, N) cells");
  app.add_option("--model", o.models, "Model families (XXZ, KIM, TFIM)")->delimiter(',');
  app.add_option("--n", o.n_sites, "System sizes")->delimiter(',');
  app.add_option("--layers", o.layers, "Number of brick layers");
  app.add_option("--site", o.site, "Initial site (1-based)");
  app.add_option("--pauli", o.pauli, "Initial Pauli (X, Y, Z)");
  app.add_option("--alpha", o.alphas, "Renyi orders")->delimiter(',');
  app.add_option("--chi", o.chis, "Bond dimensions")->delimiter(',');

  auto* evolve = app.add_subcommand("evolve", "Heisenberg evolution diagnostics");
  auto* loe = app.add_subcommand("loe", "Renyi LOE profiles along a trajectory");
  bool bits = false;
  loe->add_flag("--bits", bits, "Add a base-2 column");
  auto* truncate = app.add_subcommand("truncate", "Half-chain or MPO truncation errors");
  bool use_threshold = false, use_mpo = false;
  std::string export_json;
  std::optional<double> cutoff;
  truncate->add_option("--cutoff", cutoff, "Threshold on lambda (implies threshold mode)");
  truncate->add_flag("--threshold", use_threshold, "Threshold truncation at the config cutoff");
  truncate->add_flag("--mpo", use_mpo, "Project across every cut");
  truncate->add_option("--export-json", export_json, "Write MPO tensors of the final approximation");
  auto* bounds = app.add_subcommand("bounds", "Verify theorem bounds along trajectories");
  bool n_minus_one = false;
  bounds->add_flag("--n-minus-one", n_minus_one, "Use the N-1 prefactor");
  auto* otoc = app.add_subcommand("otoc", "OTOC errors of MPO approximations");
  std::vector<int> orders;
  otoc->add_option("--k", orders, "OTOC orders")->delimiter(',');
  auto* randmat = app.add_subcommand("randmat", "Random-matrix ensemble sweep");
  std::optional<int> samples;
  std::vector<std::string> spectra;
  std::optional<std::string> conjugation;
  std::optional<double> l_bound;
  randmat->add_option("--samples", samples, "Samples per cell");
  randmat->add_option("--spectrum", spectra, "flat or geometric:<r>")->delimiter(',');
  randmat->add_option("--conjugation", conjugation, "shared_haar_signed or independent_haar");
  randmat->add_option("--l-bound", l_bound, "L (default: measured)");
  auto* experiment = app.add_subcommand("experiment", "Run a configured experiment");
  std::optional<std::string> name;
  experiment->add_option("--name", name, "fig2_left, fig2_right, fig4_loe, thm_sweep, randmat_sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*evolve) {
      const auto cfg = build_config(o, std::nullopt);
      return finish(run_evolve(cfg), cfg);
    }
    if (*loe) {
      const auto cfg = build_config(o, std::nullopt);
      return finish(run_loe(cfg, bits), cfg);
    }
    if (*truncate) {
      auto cfg = build_config(o, std::nullopt);
      if (cutoff) {
        cfg.cutoff = *cutoff;
        use_threshold = true;
        cfg.validate();
      }
      return finish(run_truncate(cfg, use_threshold, use_mpo, export_json), cfg);
    }
    if (*bounds) {
      auto cfg = build_config(o, ex::ExperimentKind::thm_sweep);
      if (n_minus_one) cfg.n_minus_one = true;
      return finish(ex::run_thm_sweep(cfg), cfg);
    }
    if (*otoc) {
      auto cfg = build_config(o, std::nullopt);
      if (!orders.empty()) cfg.otoc_orders = orders;
      cfg.validate();
      const auto res = run_otoc(cfg);
      const int code = finish(res, cfg);
      return res.flags.empty() ? code : 2;
    }
    if (*randmat) {
      auto cfg = build_config(o, ex::ExperimentKind::randmat_sweep);
      if (samples) cfg.samples = *samples;
      if (!o.n_sites.empty()) cfg.randmat_n_sites = o.n_sites.front();
      if (!spectra.empty()) {
        std::string joined;
        for (const auto& s : spectra) joined += (joined.empty() ? "" : ",") + s;
        ex::apply_key(cfg, "spectra", joined);
      }
      if (conjugation) ex::apply_key(cfg, "conjugation", *conjugation);
      if (l_bound) cfg.l_bound = *l_bound;
      cfg.validate();
      return finish(ex::run_randmat_sweep(cfg), cfg);
    }
    if (*experiment) {
      std::optional<ex::ExperimentKind> kind;
      if (name) kind = ex::parse_experiment_kind(*name);
      if (!kind && o.config_path.empty()) throw opent::ConfigError("experiment: give --name or --config");
      const auto cfg = build_config(o, kind);
      return finish(ex::run_experiment(cfg), cfg);
    }
  } catch (const opent::BoundViolation& e) {
    std::cerr << "bound violated: " << e.what() << "\n";
    return 2;
  } catch (const opent::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
