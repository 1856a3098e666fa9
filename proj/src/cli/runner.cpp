#include "qfel/cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "qfel/cli/svg.hpp"
#include "qfel/cli/worker_pool.hpp"
#include "qfel/dynamics.hpp"
#include "qfel/gain_analytics.hpp"
#include "qfel/hamiltonians.hpp"

namespace qfel::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Files written by this run, removed again unless the run commits.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
  }

  ~OutputSet() {
    if (!committed_) rollback();
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    if (path.has_parent_path() && !fs::exists(path.parent_path())) {
      fs::create_directories(path.parent_path());
      created_subdirs_.push_back(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    written_.push_back(path);
    out << content;
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    files_.push_back(FileEntry{name, content.size(), sha256_hex(content)});
  }

  std::vector<FileEntry> manifest() const {
    auto out = files_;
    std::sort(out.begin(), out.end(), [](const FileEntry& a, const FileEntry& b) { return a.name < b.name; });
    return out;
  }

  void commit() { committed_ = true; }

 private:
  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    for (auto it = created_subdirs_.rbegin(); it != created_subdirs_.rend(); ++it) fs::remove(*it, ec);
    if (created_dir_) fs::remove(dir_, ec);
  }

  fs::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<fs::path> written_;
  std::vector<fs::path> created_subdirs_;
  std::vector<FileEntry> files_;
};

struct Context {
  const JobConfig& job;
  const RunOptions& options;
  OutputSet& out;
  RunReport& report;
  unsigned workers;
};

json check(const std::string& name, double value, std::optional<double> limit, bool pass) {
  json c = {{"name", name}, {"value", value}, {"pass", pass}};
  c["limit"] = limit ? json(*limit) : json(nullptr);
  return c;
}

json flag(const std::string& name, bool pass) { return {{"name", name}, {"pass", pass}}; }

// ---- dispersion tables ------------------------------------------------------

struct GainRow {
  double alpha;
  double kappa;
  double p_over_q;
  double deep;
  double third;
  double cubic;
  double residual;
};

GainRow gain_row(double alpha, const MomentumAxis& axis) {
  const auto deep = deep_dispersion(alpha, axis.kappa);
  const auto cubic = cubic_dispersion(alpha, axis.delta);
  const double third = std::abs(axis.kappa) < 2.0 ? third_order_gain(alpha, axis.kappa) : kNaN;
  return GainRow{alpha, axis.kappa, axis.p_over_q, deep.im_plus, third, cubic.im_plus,
                 std::max(deep.residual, cubic.residual)};
}

std::vector<GainRow> gain_table_over_kappa(double alpha, const std::vector<double>& kappas, unsigned workers) {
  std::vector<GainRow> rows(kappas.size());
  parallel_for(kappas.size(), workers,
               [&](std::size_t i) { rows[i] = gain_row(alpha, momentum_axis_from_kappa(kappas[i], alpha)); });
  return rows;
}

std::vector<GainRow> gain_table_over_momentum(const std::vector<double>& alphas, const std::vector<double>& pq,
                                              unsigned workers) {
  std::vector<GainRow> rows(alphas.size() * pq.size());
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    const double alpha = alphas[i / pq.size()];
    rows[i] = gain_row(alpha, momentum_axis(pq[i % pq.size()], alpha));
  });
  return rows;
}

std::string gain_csv(const std::vector<GainRow>& rows) {
  std::string s = "alpha,kappa,p_over_q,im_plus_deep,im_plus_third,im_plus_cubic\n";
  for (const auto& r : rows) {
    s += fmt::format("{},{},{},{},{},{}\n", format_number(r.alpha), format_number(r.kappa), format_number(r.p_over_q),
                     format_number(r.deep), format_number(r.third), format_number(r.cubic));
  }
  return s;
}

double argmax_pq(const std::vector<GainRow>& rows, double GainRow::*field) {
  double best = -std::numeric_limits<double>::infinity();
  double at = kNaN;
  for (const auto& r : rows) {
    if (std::isfinite(r.*field) && r.*field > best) {
      best = r.*field;
      at = r.p_over_q;
    }
  }
  return at;
}

std::vector<GainRow> rows_for(const std::vector<GainRow>& rows, double alpha) {
  std::vector<GainRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [&](const GainRow& r) { return r.alpha == alpha; });
  return out;
}

void gain_audit(Context& c, const std::vector<GainRow>& rows) {
  double residual = 0.0;
  for (const auto& r : rows) residual = std::max(residual, r.residual);
  c.report.audit["max_root_residual"] = residual;
  c.report.checks.push_back(check("root residual <= 1e-10", residual, 1e-10, residual <= 1e-10));
}

void per_alpha_summary(Context& c, const std::vector<GainRow>& rows, const std::vector<double>& alphas) {
  for (double alpha : alphas) {
    const auto sub = rows_for(rows, alpha);
    c.report.notes.push_back(fmt::format("alpha={}: argmax p/q deep {}, third {}, cubic {}", format_number(alpha),
                                         format_number(argmax_pq(sub, &GainRow::deep)),
                                         format_number(argmax_pq(sub, &GainRow::third)),
                                         format_number(argmax_pq(sub, &GainRow::cubic))));
  }
}

Plot gain_plot(const std::string& title, const std::vector<GainRow>& rows, const std::vector<double>& alphas,
               bool use_kappa, bool normalize) {
  Plot p;
  p.title = title;
  p.x_label = use_kappa ? "kappa" : "p/q";
  p.y_label = normalize ? "gain / max" : "Im lambda+";
  for (double alpha : alphas) {
    const auto sub = rows_for(rows, alpha);
    for (auto [name, field] : {std::pair{"deep", &GainRow::deep}, std::pair{"third", &GainRow::third},
                               std::pair{"cubic", &GainRow::cubic}}) {
      Series s;
      s.label = fmt::format("{} a={}", name, format_number(alpha));
      double peak = 0.0;
      for (const auto& r : sub) {
        if (std::isfinite(r.*field)) peak = std::max(peak, r.*field);
      }
      for (const auto& r : sub) {
        s.x.push_back(use_kappa ? r.kappa : r.p_over_q);
        s.y.push_back(normalize && peak > 0.0 ? r.*field / peak : r.*field);
      }
      p.series.push_back(std::move(s));
    }
  }
  return p;
}

void run_dispersion(Context& c) {
  const auto& job = std::get<DispersionJob>(c.job.spec);
  const auto rows = gain_table_over_kappa(job.alpha, job.kappa_grid.values(), c.workers);
  c.out.write("dispersion.csv", gain_csv(rows));
  gain_audit(c, rows);
  double gap = 0.0;
  for (const auto& r : rows) {
    if (std::abs(r.kappa) <= 1.5) gap = std::max(gap, std::abs(r.third - r.cubic));
  }
  c.report.checks.push_back(check("max|third - cubic| over |kappa| <= 1.5", gap, std::nullopt, true));
  if (c.options.svg) c.out.write("dispersion.svg", render_svg(gain_plot("Dispersion", rows, {job.alpha}, true, false)));
}

void run_gain_curve(Context& c) {
  const auto& job = std::get<GainCurveJob>(c.job.spec);
  std::vector<double> alphas = job.alphas;
  if (job.physical) {
    const auto s = gain_scales(job.physical->params, job.physical->n_electrons);
    alphas = {s.alpha_n};
    c.report.audit["gain_scales"] = {{"alpha_n", s.alpha_n},       {"omega_r", s.omega_r},
                                     {"l_g", s.l_g},               {"l_g_classical", s.l_g_classical},
                                     {"ratio", s.ratio},           {"ratio_closed_form", gain_length_ratio(s.alpha_n)},
                                     {"bandwidth", s.bandwidth}};
  }
  const auto rows = gain_table_over_momentum(alphas, job.p_over_q_grid.values(), c.workers);
  c.out.write("gain_curve.csv", gain_csv(rows));
  gain_audit(c, rows);
  per_alpha_summary(c, rows, alphas);
  if (c.options.svg) c.out.write("gain_curve.svg", render_svg(gain_plot("Gain curve", rows, alphas, false, false)));
}

// ---- dynamics ---------------------------------------------------------------

struct EvolveResult {
  Trajectory trajectory;
  double discarded_tail = 0.0;
  std::size_t dimension = 0;
};

EvolveResult run_trajectory(const EvolveJob& job) {
  const auto basis = enumerate_basis(job.model.n_electrons, LadderWindow(job.basis.mu_min, job.basis.mu_max),
                                     job.basis.n_max, job.basis.charge, max_dimension_from_env());
  const auto state = initial_state(basis, job.seed);
  const Generator generator = job.generator == GeneratorKind::rotating
                                  ? Generator::rotating(job.model)
                                  : Generator::effective(job.model, job.order, job.averaging);
  EvolveResult out;
  out.trajectory = evolve(state, generator, job.tau_grid.values(), job.integrator);
  out.dimension = basis->dimension();
  if (const auto* e = std::get_if<MixedEnsemble>(&state)) out.discarded_tail = e->discarded_tail;
  return out;
}

void trajectory_audit(Context& c, const EvolveResult& r) {
  const auto& a = r.trajectory.audit;
  c.report.audit = {{"basis_dimension", r.dimension},
                    {"scheme", to_string(r.trajectory.scheme)},
                    {"step", r.trajectory.step},
                    {"halvings", r.trajectory.halvings},
                    {"converged", a.converged},
                    {"final_change", a.final_change},
                    {"max_norm_drift", a.max_norm_drift},
                    {"norm_flag", a.norm_flag},
                    {"max_leakage", a.max_leakage},
                    {"leakage_flag", a.leakage_flag},
                    {"discarded_tail", r.discarded_tail}};
  c.report.audit_flagged = a.norm_flag || a.leakage_flag || !a.converged;
}

Plot trajectory_plot(const std::string& title, const Trajectory& t) {
  Plot p;
  p.title = title;
  p.x_label = "tau";
  p.y_label = "photons";
  Series mean{"<n>", {}, {}};
  Series var{"var n", {}, {}};
  for (const auto& pt : t.points) {
    mean.x.push_back(pt.tau);
    mean.y.push_back(pt.n_mean);
    var.x.push_back(pt.tau);
    var.y.push_back(pt.n_var);
  }
  p.series = {mean, var};
  return p;
}

void run_evolve(Context& c) {
  const auto& job = std::get<EvolveJob>(c.job.spec);
  const auto r = run_trajectory(job);
  std::ostringstream csv;
  write_trajectory_csv(csv, r.trajectory);
  c.out.write("trajectory.csv", csv.str());
  trajectory_audit(c, r);
  if (c.options.svg) c.out.write("trajectory.svg", render_svg(trajectory_plot("Evolution", r.trajectory)));
}

double seed_variance(const PhotonSeed& seed) {
  switch (seed.kind) {
    case SeedKind::fock: return 0.0;
    case SeedKind::coherent: return seed.n0;
    case SeedKind::thermal: return seed.n0 * (seed.n0 + 1.0);
  }
  return 0.0;
}

void run_variance(Context& c) {
  const auto& job = std::get<EvolveJob>(c.job.spec);
  const auto r = run_trajectory(job);
  const double alpha = job.model.alpha_n();
  const double kappa = job.model.kappa();
  std::string csv = "tau,ell,n_mean,n_var,n_mean_parametric,n_var_parametric,thermal_gap\n";
  double worst_mean = 0.0;
  double worst_gap = 0.0;
  for (const auto& p : r.trajectory.points) {
    const double ell = 2.0 * alpha * p.tau;
    const auto ref = photon_moments(ell, kappa, job.seed.n0, seed_variance(job.seed));
    const double gap = std::abs(p.n_var - p.n_mean * (p.n_mean + 1.0)) / std::max(p.n_var, 1e-6);
    if (p.tau > 0.0) {
      worst_mean = std::max(worst_mean, std::abs(p.n_mean - ref.mean) / ref.mean);
      worst_gap = std::max(worst_gap, gap);
    }
    csv += fmt::format("{},{},{},{},{},{},{}\n", format_number(p.tau), format_number(ell), format_number(p.n_mean),
                       format_number(p.n_var), format_number(ref.mean), format_number(ref.variance),
                       format_number(gap));
  }
  c.out.write("variance.csv", csv);
  trajectory_audit(c, r);
  c.report.checks.push_back(check("max relative |<n> - parametric <n>|", worst_mean, std::nullopt, true));
  c.report.checks.push_back(check("max |var - <n>(<n>+1)| / var", worst_gap, std::nullopt, true));
  if (c.options.svg) c.out.write("variance.svg", render_svg(trajectory_plot("Photon statistics", r.trajectory)));
}

// ---- averaging --------------------------------------------------------------

void run_averaging(Context& c) {
  const auto& job = std::get<AveragingJob>(c.job.spec);
  struct Entry {
    int n;
    int order;
    std::size_t dimension;
    std::size_t interior;
    double diff;
    std::vector<std::pair<std::string, std::string>> dumps;
  };
  std::vector<std::vector<Entry>> results(job.n_electrons.size());
  parallel_for(job.n_electrons.size(), c.workers, [&](std::size_t i) {
    const int n = job.n_electrons[i];
    const auto basis = enumerate_basis(n, LadderWindow(job.mu_min, job.mu_max), job.n_max, std::nullopt,
                                       max_dimension_from_env());
    const auto params = make_model_params(n, job.epsilon, job.delta);
    const auto a = effective_hamiltonian_set(*basis, params, AveragingMode::analytic);
    const auto b = effective_hamiltonian_set(*basis, params, AveragingMode::averaged);
    for (int k : job.orders) {
      const auto& ha = k == 2 ? a.h2 : a.h3;
      const auto& hb = k == 2 ? b.h2 : b.h3;
      const auto interior = interior_states(*basis, k);
      Entry e{n, k, basis->dimension(), interior.size(), max_abs_difference_on_columns(ha, hb, interior), {}};
      if (job.dump_operators) {
        for (auto [mode, op] : {std::pair{"analytic", &ha}, std::pair{"averaged", &hb}}) {
          std::ostringstream s;
          write_operator(s, *op);
          e.dumps.emplace_back(fmt::format("operators/H{}_{}_N{}.txt", k, mode, n), s.str());
        }
      }
      results[i].push_back(std::move(e));
    }
  });

  std::string csv = "n_electrons,order,dimension,interior_states,max_abs_diff\n";
  std::map<int, double> worst;
  for (const auto& per_n : results) {
    for (const auto& e : per_n) {
      csv += fmt::format("{},{},{},{},{}\n", e.n, e.order, e.dimension, e.interior, format_number(e.diff));
      worst[e.order] = std::max(worst[e.order], e.diff);
      for (const auto& [name, content] : e.dumps) c.out.write(name, content);
    }
  }
  c.out.write("averaging.csv", csv);
  for (const auto& [k, d] : worst) {
    c.report.checks.push_back(check(fmt::format("max|H{0}_analytic - H{0}_averaged| <= {1:g} (interior)", k,
                                                job.tolerance),
                                    d, job.tolerance, d <= job.tolerance));
  }
}

// ---- figures ----------------------------------------------------------------

constexpr const char* kPhotonHeader = "ell,kappa,n_mean,n_var\n";

std::string photon_rows(const std::vector<double>& ells, double kappa, const std::vector<PhotonStats>& stats) {
  std::string s;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    s += fmt::format("{},{},{},{}\n", format_number(ells[i]), format_number(kappa), format_number(stats[i].mean),
                     format_number(stats[i].variance));
  }
  return s;
}

void run_fig3(Context& c, const FigureJob& job) {
  const auto ells = job.ell_grid.values();
  std::vector<std::vector<PhotonStats>> table(job.kappas.size(), std::vector<PhotonStats>(ells.size()));
  parallel_for(job.kappas.size() * ells.size(), c.workers, [&](std::size_t i) {
    const std::size_t k = i / ells.size();
    table[k][i % ells.size()] = photon_moments(ells[i % ells.size()], job.kappas[k], 0.0, 0.0);
  });
  std::string csv = kPhotonHeader;
  for (std::size_t k = 0; k < job.kappas.size(); ++k) csv += photon_rows(ells, job.kappas[k], table[k]);
  c.out.write("fig3.csv", csv);

  // ordering by |kappa| must give decreasing n_sp at every ell > 0
  std::vector<std::size_t> order(job.kappas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(job.kappas[a]) < std::abs(job.kappas[b]); });
  bool monotone = true;
  for (std::size_t j = 0; j < ells.size(); ++j) {
    if (!(ells[j] > 0.0)) continue;
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (std::abs(job.kappas[order[i]]) == std::abs(job.kappas[order[i - 1]])) continue;
      if (!(table[order[i]][j].mean < table[order[i - 1]][j].mean)) monotone = false;
    }
  }
  c.report.checks.push_back(flag("n_sp decreasing in |kappa| for ell > 0", monotone));
  for (std::size_t k = 0; k < job.kappas.size(); ++k) {
    if (job.kappas[k] != 0.0) continue;
    for (std::size_t j = 0; j < ells.size(); ++j) {
      if (ells[j] != 10.0) continue;
      const double ref = std::pow(std::sinh(5.0), 2);
      const double err = std::abs(table[k][j].mean - ref) / ref;
      c.report.checks.push_back(check("kappa=0, ell=10 relative error vs sinh^2(5)", err, 1e-9, err <= 1e-9));
    }
  }
  if (std::any_of(job.kappas.begin(), job.kappas.end(), [](double k) { return std::abs(k) > 2.0; })) {
    c.report.notes.push_back("kappa beyond the band edge |kappa| > 2 uses the oscillatory continuation (extrapolation)");
    c.report.audit["extrapolated"] = true;
  }
  if (c.options.svg) {
    Plot p;
    p.title = "Spontaneous emission";
    p.x_label = "L/L_g";
    p.y_label = "n_sp";
    p.log_y = job.log_scale;
    for (std::size_t k = 0; k < job.kappas.size(); ++k) {
      Series s{fmt::format("kappa={}", format_number(job.kappas[k])), ells, {}};
      for (const auto& st : table[k]) s.y.push_back(st.mean);
      p.series.push_back(std::move(s));
    }
    c.out.write("fig3.svg", render_svg(p));
  }
}

void run_fig5(Context& c, const FigureJob& job) {
  const auto ells = job.ell_grid.values();
  const double n0 = job.n0;
  const std::vector<std::pair<std::string, double>> seeds{
      {"thermal", n0 * (n0 + 1.0)}, {"coherent", n0}, {"fock", 0.0}};
  std::vector<std::vector<PhotonStats>> table(seeds.size(), std::vector<PhotonStats>(ells.size()));
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t j = 0; j < ells.size(); ++j) table[s][j] = photon_moments(ells[j], job.kappa, n0, seeds[s].second);
    c.out.write(fmt::format("fig5_{}.csv", seeds[s].first), kPhotonHeader + photon_rows(ells, job.kappa, table[s]));
  }
  bool ordered = true;
  for (std::size_t j = 0; j < ells.size(); ++j) {
    if (!(ells[j] > 0.0) || n0 <= 0.0) continue;
    const double th = table[0][j].variance / table[0][j].mean;
    const double co = table[1][j].variance / table[1][j].mean;
    const double fo = table[2][j].variance / table[2][j].mean;
    if (!(th > co && co > fo)) ordered = false;
  }
  c.report.checks.push_back(flag("normalized variance thermal > coherent > fock for ell > 0", ordered));
  if (n0 > 0.0) {
    const auto far = photon_moments(20.0, job.kappa, n0, 0.0);
    const double asym = (far.mean + 1.0) / (n0 + 1.0);
    const double err = std::abs(*far.fano - asym) / asym;
    c.report.checks.push_back(check("fock fano at ell=20 vs (<n>+1)/(n0+1)", err, 0.01, err <= 0.01));
  }
  if (c.options.svg) {
    Plot p;
    p.title = "Amplified seed statistics";
    p.x_label = "L/L_g";
    p.y_label = "var n / <n>";
    p.log_y = job.log_scale;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      Series line{seeds[s].first, ells, {}};
      for (const auto& st : table[s]) line.y.push_back(st.fano.value_or(kNaN));
      p.series.push_back(std::move(line));
    }
    c.out.write("fig5.svg", render_svg(p));
  }
}

void run_fig4(Context& c, const FigureJob& job) {
  const auto rows = gain_table_over_momentum(job.alphas, job.p_over_q_grid.values(), c.workers);
  c.out.write("fig4.csv", gain_csv(rows));
  gain_audit(c, rows);
  per_alpha_summary(c, rows, job.alphas);
  for (double alpha : job.alphas) {
    if (alpha < 1.0) continue;
    const double at = argmax_pq(rows_for(rows, alpha), &GainRow::cubic);
    c.report.checks.push_back(check(fmt::format("classical cubic argmax |p/q| <= 0.2 at alpha={}", format_number(alpha)),
                                    std::abs(at), 0.2, std::abs(at) <= 0.2));
  }
  c.report.notes.push_back(
      "classical curve is the cubic dispersion at the configured alpha; its identity with the classical reference "
      "scaling is assumed");
  if (c.options.svg) c.out.write("fig4.svg", render_svg(gain_plot("Quantum and classical gain", rows, job.alphas, false, true)));
}

void run_fig6(Context& c, const FigureJob& job) {
  const auto rows = gain_table_over_momentum(job.alphas, job.p_over_q_grid.values(), c.workers);
  c.out.write("fig6.csv", gain_csv(rows));
  gain_audit(c, rows);
  per_alpha_summary(c, rows, job.alphas);
  for (double alpha : job.alphas) {
    const auto sub = rows_for(rows, alpha);
    double third_gap = 0.0;
    double band_gap = 0.0;
    double deep_gap = 0.0;
    for (const auto& r : sub) {
      if (std::abs(r.kappa) <= 1.5) third_gap = std::max(third_gap, std::abs(r.third - r.cubic));
      // the series corrections diverge towards |kappa| = 2
      if (std::isfinite(r.third)) band_gap = std::max(band_gap, std::abs(r.third - r.cubic));
      deep_gap = std::max(deep_gap, std::abs(r.deep - r.cubic));
    }
    const std::string a = format_number(alpha);
    const bool small = alpha <= 0.1;
    c.report.checks.push_back(check(fmt::format("alpha={} max|third - cubic| over |kappa| <= 1.5", a), third_gap,
                                    small ? std::optional(1e-4) : std::nullopt, !small || third_gap <= 1e-4));
    c.report.checks.push_back(
        check(fmt::format("alpha={} max|third - cubic| over |kappa| < 2", a), band_gap, std::nullopt, true));
    c.report.checks.push_back(check(fmt::format("alpha={} max|deep - cubic|", a), deep_gap, std::nullopt, true));
    const double shift = argmax_pq(sub, &GainRow::third);
    c.report.checks.push_back(check(fmt::format("alpha={} third order argmax p/q", a), shift, std::nullopt, true));
  }
  if (c.options.svg) c.out.write("fig6.svg", render_svg(gain_plot("Two-level approximation", rows, job.alphas, false, false)));
}

void run_figure(Context& c) {
  const auto& job = std::get<FigureJob>(c.job.spec);
  switch (job.figure) {
    case FigureKind::fig3: run_fig3(c, job); break;
    case FigureKind::fig4: run_fig4(c, job); break;
    case FigureKind::fig5: run_fig5(c, job); break;
    case FigureKind::fig6: run_fig6(c, job); break;
  }
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

json RunReport::to_json() const {
  json files_json = json::array();
  for (const auto& f : files) files_json.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  return {{"job", job},
          {"files", files_json},
          {"audit", audit},
          {"audit_flagged", audit_flagged},
          {"checks", checks},
          {"notes", notes},
          {"timing", {{"wall_seconds", wall_seconds}}}};
}

RunReport run(const JobConfig& job, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.job = job.resolved;
  try {
    OutputSet out(options.out_dir);
    Context c{job, options, out, report, resolve_workers(job.workers)};
    switch (job.kind) {
      case JobKind::dispersion: run_dispersion(c); break;
      case JobKind::gain_curve: run_gain_curve(c); break;
      case JobKind::evolve: run_evolve(c); break;
      case JobKind::variance: run_variance(c); break;
      case JobKind::averaging_check: run_averaging(c); break;
      case JobKind::figure: run_figure(c); break;
    }
    report.files = out.manifest();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.write("report.json", report.to_json().dump(2) + "\n");
    out.commit();
  } catch (const std::exception& e) {
    throw JobError(fmt::format("{} job failed: {}", to_string(job.kind), e.what()));
  }
  return report;
}

}  // namespace qfel::cli
