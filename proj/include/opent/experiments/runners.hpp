#pragma once

#include "opent/bounds.hpp"
#include "opent/circuits.hpp"
#include "opent/entropy.hpp"
#include "opent/experiments/config.hpp"
#include "opent/experiments/csv.hpp"
#include "opent/randmat.hpp"
#include "opent/truncation.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace opent::experiments {

/// Runs fn(0..count-1) on up to `workers` threads. Results keep index
/// order; the exception from the lowest failing index is rethrown.
template <class R>
std::vector<R> run_cells(std::size_t count, int workers, const std::function<R(std::size_t)>& fn) {
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
  if (n_threads <= 1 || count <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(n_threads, count); ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Everything an experiment produces.
struct RunResult {
  std::vector<Table> tables;
  std::vector<BoundCheck> checks;
  /// Soft findings reported without failing the run.
  std::vector<std::string> flags;
};

struct Cell {
  ModelSpec model;
  int n_sites;
};

inline std::vector<Cell> model_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (const auto& m : cfg.models) {
    for (int n : cfg.n_sites_list) cells.push_back({m, n});
  }
  return cells;
}

inline DenseOperator initial_operator(const ExperimentConfig& cfg, int n, char pauli) {
  return local_pauli(n, cfg.site_for(n), pauli);
}

inline std::string header_comment(const ExperimentConfig& cfg, const std::string& command = {}) {
  std::ostringstream os;
  if (command.empty()) {
    os << "experiment=" << to_string(cfg.experiment);
  } else {
    os << "command=" << command;
  }
  os << " seed=" << cfg.seed;
  return os.str();
}

// ---------------------------------------------------------------------------

inline Table fig2_left_table() {
  return Table{"fig2_left",
               {"model", "N", "t", "chi", "tail_sum", "lambda_next", "spectral_error", "hs_error"},
               {},
               {}};
}

/// Half-chain threshold truncation along one trajectory.
inline Table fig2_left_cell(const ExperimentConfig& cfg, const Cell& c) {
  Table t = fig2_left_table();
  const Bipartition half(c.n_sites, c.n_sites / 2);
  evolve_each(
      initial_operator(cfg, c.n_sites, cfg.initial_pauli), c.model, cfg.max_layers,
      [&](const EvolutionState& s) {
        const auto sd = schmidt_decompose(s.op, half);
        const auto chi = threshold_rank(sd.lambdas(), cfg.cutoff);
        const auto tr = truncate_single_cut(sd, s.op, chi);
        t.add(Table::RowBuilder{} << c.model.name() << c.n_sites << s.layers_applied << static_cast<long>(chi)
                                  << tr.report.tail_sum << tr.report.lambda_next << tr.report.spectral_error
                                  << tr.report.hs_error_normalized);
      },
      cfg.site_for(c.n_sites), cfg.first_layer_odd);
  return t;
}

inline RunResult run_fig2_left(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto cells = model_cells(cfg);
  auto parts = run_cells<Table>(cells.size(), cfg.resolved_workers(),
                                [&](std::size_t i) { return fig2_left_cell(cfg, cells[i]); });
  Table all = fig2_left_table();
  all.comments.push_back(header_comment(cfg));
  for (const auto& p : parts) all.append(p);
  return {{std::move(all)}, {}, {}};
}

// ---------------------------------------------------------------------------

inline Table fig2_right_norms_table() {
  return Table{"fig2_right_norms", {"model", "N", "t", "index", "lambda", "factor_norm"}, {}, {}};
}

inline Table fig2_right_summary_table() {
  return Table{"fig2_right_summary",
               {"model", "N", "t", "count", "min", "q1", "median", "q3", "max", "iqr", "sqrt_dim"},
               {},
               {}};
}

struct FactorNormCell {
  Table norms;
  Table summary;
};

/// Factor-norm distribution across the half chain at the final layer.
inline FactorNormCell fig2_right_cell(const ExperimentConfig& cfg, const Cell& c) {
  std::optional<DenseOperator> last;
  evolve_each(
      initial_operator(cfg, c.n_sites, cfg.initial_pauli), c.model, cfg.max_layers,
      [&](const EvolutionState& s) {
        if (s.layers_applied == cfg.max_layers) last = s.op;
      },
      cfg.site_for(c.n_sites), cfg.first_layer_odd);
  const auto sd = schmidt_decompose(*last, Bipartition(c.n_sites, c.n_sites / 2));
  const auto summary = schmidt_factor_norms(sd);
  FactorNormCell out{fig2_right_norms_table(), fig2_right_summary_table()};
  // schmidt_factor_norms sorts; recompute per index to keep lambda alignment.
  for (Eigen::Index i = 0; i < sd.rank(); ++i) {
    const double v = spectral_norm(sd.left_factor(i)) * spectral_norm(sd.right_factor(i));
    out.norms.add(Table::RowBuilder{} << c.model.name() << c.n_sites << cfg.max_layers << static_cast<long>(i + 1)
                                      << sd.lambdas()(i) << v);
  }
  out.summary.add(Table::RowBuilder{} << c.model.name() << c.n_sites << cfg.max_layers
                                      << static_cast<long>(summary.values.size()) << summary.min << summary.q1
                                      << summary.median << summary.q3 << summary.max << summary.iqr()
                                      << std::sqrt(static_cast<double>(last->dim())));
  return out;
}

inline RunResult run_fig2_right(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto cells = model_cells(cfg);
  auto parts = run_cells<FactorNormCell>(cells.size(), cfg.resolved_workers(),
                                         [&](std::size_t i) { return fig2_right_cell(cfg, cells[i]); });
  Table norms = fig2_right_norms_table();
  Table summary = fig2_right_summary_table();
  norms.comments.push_back(header_comment(cfg));
  summary.comments.push_back(header_comment(cfg));
  for (const auto& p : parts) {
    norms.append(p.norms);
    summary.append(p.summary);
  }
  return {{std::move(norms), std::move(summary)}, {}, {}};
}

// ---------------------------------------------------------------------------

inline Table fig4_table() { return Table{"fig4_loe", {"model", "N", "initial", "t", "loe"}, {}, {}}; }

inline constexpr double kTfimSigmaXCeiling = 2.0 * 0.69314718055994530942;  // 2 log 2 nats

inline Table fig4_cell(const ExperimentConfig& cfg, const Cell& c, char pauli) {
  Table t = fig4_table();
  const Bipartition half(c.n_sites, c.n_sites / 2);
  evolve_each(
      initial_operator(cfg, c.n_sites, pauli), c.model, cfg.max_layers,
      [&](const EvolutionState& s) {
        t.add(Table::RowBuilder{} << c.model.name() << c.n_sites << std::string(1, pauli) << s.layers_applied
                                  << loe(s.op, half, 1.0));
      },
      cfg.site_for(c.n_sites), cfg.first_layer_odd);
  return t;
}

inline RunResult run_fig4_loe(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Job {
    Cell cell;
    char pauli;
  };
  std::vector<Job> jobs;
  for (const auto& c : model_cells(cfg)) jobs.push_back({c, cfg.initial_pauli});
  if (cfg.tfim_sigma_x) {
    for (const auto& c : model_cells(cfg)) {
      if (c.model.family == ModelFamily::TFIM && cfg.initial_pauli != 'X') jobs.push_back({c, 'X'});
    }
  }
  auto parts = run_cells<Table>(jobs.size(), cfg.resolved_workers(),
                                [&](std::size_t i) { return fig4_cell(cfg, jobs[i].cell, jobs[i].pauli); });
  RunResult res;
  Table all = fig4_table();
  all.comments.push_back(header_comment(cfg));
  for (const auto& p : parts) all.append(p);
  for (std::size_t r = 0; r < all.rows.size(); ++r) {
    if (all.text(r, "model") == "TFIM" && all.text(r, "initial") == "X" &&
        all.number(r, "loe") > kTfimSigmaXCeiling + 1e-6) {
      res.flags.push_back("TFIM sigma_x LOE " + all.text(r, "loe") + " exceeds 2 log 2 at N=" + all.text(r, "N") +
                          " t=" + all.text(r, "t"));
    }
  }
  res.tables.push_back(std::move(all));
  return res;
}

// ---------------------------------------------------------------------------

inline Table bound_table(const std::string& name) {
  return Table{name,
               {"theorem", "t", "N", "model", "alpha", "chi", "lhs", "rhs", "satisfied", "k", "epsilon", "e_alpha"},
               {},
               {}};
}

inline void add_check_row(Table& t, const BoundCheck& c) {
  t.add(Table::RowBuilder{} << to_string(c.theorem) << c.t << static_cast<int>(c.param("N", 0)) << c.model
                            << c.param("alpha") << static_cast<long>(c.param("chi", 0)) << c.lhs << c.rhs
                            << c.satisfied << c.param("k") << c.param("epsilon") << c.param("e_alpha"));
}

/// Entropies used by the theorem checks at one snapshot.
struct SnapshotEntropies {
  double e1 = 0.0;
  std::map<double, double> e_alpha;  // max over cuts
};

inline SnapshotEntropies snapshot_entropies(const DenseOperator& op, const std::vector<double>& alphas) {
  std::vector<double> grid = alphas;
  grid.push_back(1.0);
  const auto prof = renyi_profile(op, "snapshot", grid);
  SnapshotEntropies e;
  e.e1 = prof.max_over_cuts(1.0);
  for (double a : alphas) e.e_alpha[a] = prof.max_over_cuts(a);
  return e;
}

/// Theorem checks at one snapshot, for every chi and alpha of the config.
/// Alpha > 1 yields T1_entropy1 and T1_alpha rows; alpha < 1 yields T2 and
/// one T3 row per OTOC order.
inline std::vector<BoundCheck> snapshot_checks(const ExperimentConfig& cfg, const ModelSpec& model,
                                               const DenseOperator& op, int t, const DenseOperator& x_op) {
  std::vector<BoundCheck> out;
  if (cfg.alpha_grid.empty() || cfg.chi_grid.empty()) return out;
  const int n = op.n_sites();
  const int d = op.local_dim();
  const auto ent = snapshot_entropies(op, cfg.alpha_grid);
  const EnsembleSpec basis{EnsembleKind::computational_basis_uniform, n, 1.0, std::nullopt};
  std::map<int, double> exact_otoc;
  for (int k : cfg.otoc_orders) exact_otoc[k] = otoc(op, x_op, k).value;

  MpoOptions opts;
  opts.compute_spectral = false;
  for (int chi : cfg.chi_grid) {
    const auto mpo = mpo_approximate(op, chi, opts);
    if (!mpo.rank_certified) {
      throw BoundViolation("mpo_approximate rank certificate failed at t=" + std::to_string(t) +
                           " chi=" + std::to_string(chi));
    }
    const DenseOperator delta = op - mpo.op;
    const double eps = std::abs(worst_case_state(delta).value);
    const double log_chi = std::log(static_cast<double>(chi));
    const double approx_norm = spectral_norm(mpo.op);
    for (double a : cfg.alpha_grid) {
      const double ea = ent.e_alpha.at(a);
      std::map<std::string, double> base{{"alpha", a}, {"chi", chi}, {"N", n}, {"d", d}, {"e_alpha", ea}};
      auto tag = [&](BoundCheck c) {
        c.t = t;
        c.model = model.name();
        return c;
      };
      if (a > 1.0) {
        auto p = base;
        p["epsilon"] = eps;
        p["e1"] = ent.e1;
        out.push_back(tag(BoundCheck::make(Theorem::T1_entropy1, log_chi,
                                           thm1_entropy1_floor(ent.e1, eps, n, d), p)));
        // The alpha branch is undefined for eps >= 1 and imposes nothing.
        const double rhs = eps < 1.0 ? thm1_alpha_floor(ea, a, eps) : -kInfinity;
        out.push_back(tag(BoundCheck::make(Theorem::T1_alpha, log_chi, rhs, p)));
      } else {
        const auto err = avg_expectation_error(op, mpo.op, x_op, basis);
        auto p = base;
        p["epsilon"] = mpo.total.hs_error_normalized;
        p["b"] = 1.0;
        out.push_back(tag(BoundCheck::make(Theorem::T2, err.mean_abs,
                                           thm2_error_ceiling(ea, a, chi, n, 1.0, cfg.n_minus_one), p)));
        for (int k : cfg.otoc_orders) {
          auto pk = p;
          pk["k"] = k;
          pk["approx_opnorm"] = approx_norm;
          const double lhs = std::abs(exact_otoc[k] - otoc(mpo.op, x_op, k).value);
          out.push_back(tag(BoundCheck::make(Theorem::T3, lhs, thm3_bound(ea, a, chi, n, k, approx_norm), pk)));
        }
      }
    }
  }
  return out;
}

/// JSON dump of a snapshot that failed a check.
inline nlohmann::json violation_dump(const BoundCheck& c, const DenseOperator& op) {
  nlohmann::json j;
  j["theorem"] = to_string(c.theorem);
  j["model"] = c.model;
  j["t"] = c.t;
  j["lhs"] = c.lhs;
  j["rhs"] = c.rhs;
  for (const auto& [k, v] : c.params) j["params"][k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_number(v));
  for (int cut = 1; cut < op.n_sites(); ++cut) {
    const auto sd = schmidt_decompose(op, Bipartition(op.n_sites(), cut));
    std::vector<double> lam;
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(sd.length(), 64); ++i) lam.push_back(sd.lambdas()(i));
    j["cuts"].push_back({{"cut", cut}, {"loe1", loe(sd, 1.0)}, {"lambdas_top", lam}});
  }
  j["hermiticity_defect"] = op.hermiticity_defect();
  j["hs_norm"] = op.hs_norm();
  return j;
}

struct ThmCellResult {
  std::vector<BoundCheck> checks;
  std::optional<nlohmann::json> violation;
};

inline std::uint64_t cell_seed(std::uint64_t seed, const Cell& c, int t) {
  const auto family = static_cast<std::uint64_t>(c.model.family);
  return split_seed(seed, (family * 64 + static_cast<std::uint64_t>(c.n_sites)) * 4096 + static_cast<std::uint64_t>(t));
}

inline ThmCellResult thm_cell(const ExperimentConfig& cfg, const Cell& c) {
  ThmCellResult res;
  evolve_each(
      initial_operator(cfg, c.n_sites, cfg.initial_pauli), c.model, cfg.max_layers,
      [&](const EvolutionState& s) {
        if (res.violation) return;
        std::mt19937_64 rng(cell_seed(cfg.seed, c, s.layers_applied));
        const auto x_op = random_pauli_string(c.n_sites, rng);
        for (auto& chk : snapshot_checks(cfg, c.model, s.op, s.layers_applied, x_op)) {
          if (!chk.satisfied && !res.violation) res.violation = violation_dump(chk, s.op);
          res.checks.push_back(std::move(chk));
        }
      },
      cfg.site_for(c.n_sites), cfg.first_layer_odd);
  return res;
}

/// Verifies Thms 1-3 along every trajectory. With `abort_on_violation`, the
/// first failing check is dumped to `<output_dir>/thm_violation.json` (when
/// an output directory is set) and raised as BoundViolation.
inline RunResult run_thm_sweep(const ExperimentConfig& cfg, bool abort_on_violation = true) {
  cfg.validate();
  const auto cells = model_cells(cfg);
  auto parts = run_cells<ThmCellResult>(cells.size(), cfg.resolved_workers(),
                                        [&](std::size_t i) { return thm_cell(cfg, cells[i]); });
  RunResult res;
  Table table = bound_table("thm_sweep");
  table.comments.push_back(header_comment(cfg));
  for (auto& p : parts) {
    if (p.violation && abort_on_violation) {
      if (!cfg.output_dir.empty()) {
        write_file_atomic(std::filesystem::path(cfg.output_dir) / "thm_violation.json", p.violation->dump(2));
      }
      throw BoundViolation("theorem check violated: " + p.violation->dump());
    }
    for (auto& chk : p.checks) {
      add_check_row(table, chk);
      res.checks.push_back(std::move(chk));
    }
  }
  res.tables.push_back(std::move(table));
  return res;
}

// ---------------------------------------------------------------------------

inline Table randmat_table() {
  return Table{"randmat_sweep",
               {"spectrum", "seed", "chi", "alpha", "samples", "empirical_mean", "bernstein_bound", "thm4_bound",
                "tail_sum", "lambda_next", "l_bound", "max_loe_deviation", "second_moment_deviation",
                "satisfied"},
               {},
               {}};
}

struct RandmatSpectrumResult {
  Table table;
  std::vector<BoundCheck> checks;
  double max_loe_deviation = 0.0;
};

inline RandmatSpectrumResult randmat_spectrum_cell(const ExperimentConfig& cfg, const SpectrumSpec& spec,
                                                   std::uint64_t seed, const std::vector<double>& sub_unit) {
  const int n = cfg.randmat_n_sites;
  const Bipartition cut(n, n / 2);
  const Eigen::Index len = ipow(4, std::min(cut.n_a(), cut.n_b()));
  const auto base = synthetic_decomposition(cut, spec.lambdas(len));
  const double l_bound = cfg.l_bound > 0.0 ? cfg.l_bound : measured_l_bound(base);
  const auto prepared = prepare_ensemble(EnsembleElementSpec{base, l_bound, seed, cfg.conjugation});
  RandmatSpectrumResult out{randmat_table(), {}, 0.0};
  for (int chi : cfg.chi_grid) {
    const Eigen::Index c = std::min<Eigen::Index>(chi, len);
    const auto cell = randmat_cell(prepared, c, cfg.samples, sub_unit, true);
    out.max_loe_deviation = std::max(out.max_loe_deviation, cell.max_loe_deviation);
    const bool bern_ok = cell.empirical_mean <= cell.bernstein + BoundCheck::kSlack;
    for (const auto& [alpha, bound] : cell.thm4) {
      auto chk = BoundCheck::make(Theorem::T4, cell.empirical_mean, bound,
                                  {{"alpha", alpha}, {"chi", static_cast<double>(c)}, {"N", n}, {"L", l_bound},
                                   {"bernstein", cell.bernstein}});
      chk.model = spec.label();
      out.table.add(Table::RowBuilder{} << spec.label() << static_cast<unsigned long long>(seed)
                                        << static_cast<long>(c) << alpha << cell.samples << cell.empirical_mean
                                        << cell.bernstein << bound << cell.tail_sum << cell.lambda_next << l_bound
                                        << cell.max_loe_deviation << cell.second_moment_deviation
                                        << (bern_ok && chk.satisfied));
      if (!bern_ok) chk.satisfied = false;
      out.checks.push_back(std::move(chk));
    }
  }
  return out;
}

/// Random-matrix ensemble statistics for every synthetic spectrum and chi.
inline RunResult run_randmat_sweep(const ExperimentConfig& cfg, bool abort_on_violation = true) {
  cfg.validate();
  std::vector<double> sub_unit;
  for (double a : cfg.alpha_grid) {
    if (a > 0.0 && a < 1.0) sub_unit.push_back(a);
  }
  if (sub_unit.empty()) throw ConfigError("randmat_sweep needs at least one alpha in (0,1)");
  if (cfg.spectra.empty()) throw ConfigError("randmat_sweep: spectra list is empty");
  auto parts = run_cells<RandmatSpectrumResult>(cfg.spectra.size(), cfg.resolved_workers(), [&](std::size_t i) {
    return randmat_spectrum_cell(cfg, cfg.spectra[i], split_seed(cfg.seed, i), sub_unit);
  });
  RunResult res;
  Table table = randmat_table();
  table.comments.push_back(header_comment(cfg));
  table.comments.push_back(std::string("conjugation=") +
                           (cfg.conjugation == ConjugationMode::shared_haar_signed ? "shared_haar_signed"
                                                                                   : "independent_haar"));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto& p = parts[i];
    table.append(p.table);
    for (auto& c : p.checks) {
      if (!c.satisfied && abort_on_violation) {
        throw BoundViolation("random-matrix bound violated for spectrum " + c.model + " chi=" +
                             format_number(c.param("chi")) + ": empirical " + format_number(c.lhs) +
                             ", thm4 " + format_number(c.rhs) + ", bernstein " + format_number(c.param("bernstein")));
      }
      res.checks.push_back(std::move(c));
    }
    if (cfg.conjugation == ConjugationMode::shared_haar_signed && p.max_loe_deviation > 1e-7) {
      res.flags.push_back("LOE drift " + format_number(p.max_loe_deviation) + " for spectrum " +
                          cfg.spectra[i].label());
    }
  }
  res.tables.push_back(std::move(table));
  return res;
}

// ---------------------------------------------------------------------------

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::fig2_left: return run_fig2_left(cfg);
    case ExperimentKind::fig2_right: return run_fig2_right(cfg);
    case ExperimentKind::fig4_loe: return run_fig4_loe(cfg);
    case ExperimentKind::thm_sweep: return run_thm_sweep(cfg);
    case ExperimentKind::randmat_sweep: return run_randmat_sweep(cfg);
  }
  throw ConfigError("unknown experiment");
}

/// Post-run pass over emitted rows; returns one message per broken invariant.
inline std::vector<std::string> validate_result(const RunResult& res) {
  std::vector<std::string> issues;
  auto where = [](const Table& t, std::size_t r) {
    std::string s = t.name + " row " + std::to_string(r + 1);
    return s;
  };
  for (const auto& t : res.tables) {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.name == "fig2_left") {
        const double spec = t.number(r, "spectral_error");
        const double hs = t.number(r, "hs_error");
        const double dim = std::pow(2.0, t.number(r, "N"));
        if (hs > spec + 1e-9 || spec > std::sqrt(dim) * hs + 1e-9) issues.push_back(where(t, r) + ": norm sandwich");
        if (std::abs(hs * hs - t.number(r, "tail_sum")) > 1e-8) issues.push_back(where(t, r) + ": hs^2 != tail sum");
      } else if (t.name == "fig2_right_summary") {
        if (t.number(r, "max") > t.number(r, "sqrt_dim") + 1e-8) issues.push_back(where(t, r) + ": norm above sqrt(D)");
      } else if (t.name == "fig4_loe") {
        if (t.number(r, "t") == 0 && std::abs(t.number(r, "loe")) > 1e-12) {
          issues.push_back(where(t, r) + ": nonzero LOE at t=0");
        }
      } else if (t.name == "thm_sweep" || t.name == "randmat_sweep") {
        if (t.text(r, "satisfied") != "true") issues.push_back(where(t, r) + ": bound not satisfied");
      }
    }
  }
  return issues;
}

}  // namespace opent::experiments
