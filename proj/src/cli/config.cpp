#include "qfel/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "qfel/errors.hpp"

namespace qfel::cli {

namespace {

const json kRequired = "<required>";
// marks an optional nested block whose own keys are schema checked when present
const char* const kOptionalBlock = "<optional block>";

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

json optional_block(json schema) {
  schema[kOptionalBlock] = true;
  return schema;
}

bool is_optional_block(const json& d) { return d.is_object() && d.contains(kOptionalBlock); }

bool is_schema_object(const json& d) { return d.is_object(); }

// Overlays the user document on the defaults, recording unknown and missing keys.
json merge(const json& defaults, const json& user, const std::string& path, std::vector<std::string>& errors) {
  json out = json::object();
  if (!user.is_object()) {
    errors.push_back(fmt::format("{} must be an object", path.empty() ? "config" : path));
    return out;
  }
  for (const auto& [key, value] : user.items()) {
    if (!defaults.contains(key) || key == kOptionalBlock) {
      errors.push_back(fmt::format("unknown key '{}'", join_path(path, key)));
    }
  }
  for (const auto& [key, d] : defaults.items()) {
    if (key == kOptionalBlock) continue;
    const std::string here = join_path(path, key);
    if (user.contains(key)) {
      out[key] = is_schema_object(d) ? merge(d, user.at(key), here, errors) : user.at(key);
    } else if (d == kRequired) {
      errors.push_back(fmt::format("missing required key '{}'", here));
    } else if (is_optional_block(d) || d.is_null()) {
      // absent optional value stays absent
    } else if (is_schema_object(d)) {
      out[key] = merge(d, json::object(), here, errors);
    } else {
      out[key] = d;
    }
  }
  return out;
}

json grid(double lo, double hi, int n) { return json::array({lo, hi, n}); }

json evolve_defaults() {
  return {
      {"model", {{"n_electrons", kRequired}, {"alpha", nullptr}, {"kappa", nullptr}, {"epsilon", nullptr}, {"delta", nullptr}}},
      {"basis", {{"window", json::array({-1, 2})}, {"n_max", 16}, {"charge", nullptr}}},
      {"seed", {{"kind", "fock"}, {"n0", 0.0}}},
      {"generator", {{"kind", "rotating"}, {"order", 1}, {"averaging", "analytic"}}},
      {"tau_grid", kRequired},
      {"integrator",
       {{"scheme", "cf4"},
        {"dtau", std::numbers::pi / 40.0},
        {"rtol", 1e-7},
        {"max_halvings", 6},
        {"norm_threshold", 1e-9},
        {"leakage_threshold", 0.05},
        {"hard_factor", 10.0}}},
  };
}

json figure_defaults(const std::string& figure) {
  if (figure == "fig3") {
    return {{"kappas", json::array({0.0, 1.0, 1.5, 1.9})}, {"ell_grid", grid(0.0, 10.0, 201)}, {"log_scale", true}};
  }
  if (figure == "fig4") {
    return {{"alphas", json::array({0.1, 10.0})}, {"p_over_q_grid", grid(-1.5, 1.5, 1201)}, {"log_scale", false}};
  }
  if (figure == "fig5") {
    return {{"n0", 100.0}, {"kappa", 0.0}, {"ell_grid", grid(0.0, 10.0, 201)}, {"log_scale", false}};
  }
  return {{"alphas", json::array({0.1, 0.5})}, {"p_over_q_grid", grid(-1.0, 2.0, 3001)}, {"log_scale", false}};
}

json defaults_for(JobKind kind, const json& user) {
  json d = {{"kind", kRequired}, {"out", nullptr}, {"workers", 0}};
  switch (kind) {
    case JobKind::dispersion:
      d["alpha"] = kRequired;
      d["kappa_grid"] = grid(-2.0, 2.0, 401);
      break;
    case JobKind::gain_curve:
      d["alphas"] = nullptr;
      d["physical"] = optional_block(
          {{"g", kRequired}, {"omega_r", kRequired}, {"q", kRequired}, {"c", 299'792'458.0}, {"n_electrons", kRequired}});
      d["p_over_q_grid"] = grid(-1.0, 2.0, 601);
      break;
    case JobKind::evolve:
    case JobKind::variance:
      d.update(evolve_defaults());
      break;
    case JobKind::averaging_check:
      d["n_electrons"] = json::array({1, 2, 3});
      d["window"] = json::array({-3, 4});
      d["n_max"] = 6;
      d["epsilon"] = 0.1;
      d["delta"] = 0.0;
      d["orders"] = json::array({2, 3});
      d["tolerance"] = 1e-12;
      d["dump_operators"] = false;
      break;
    case JobKind::figure: {
      d["figure"] = kRequired;
      const auto it = user.find("figure");
      if (it != user.end() && it->is_string()) d.update(figure_defaults(it->get<std::string>()));
      break;
    }
  }
  return d;
}

// Typed reads from the merged document; every failure is recorded, none throws.
class Reader {
 public:
  Reader(const json& doc, std::vector<std::string>& errors) : doc_(doc), errors_(errors) {}

  const json* find(const std::string& path) const {
    const json* node = &doc_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(key)) return nullptr;
      node = &node->at(key);
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return node;
  }

  bool has(const std::string& path) const { return find(path) != nullptr; }

  double number(const std::string& path, double fallback = 0.0) {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_number() || !std::isfinite(v->get<double>())) {
      fail("{} must be a finite number", path);
      return fallback;
    }
    return v->get<double>();
  }

  double positive(const std::string& path, double fallback = 1.0) {
    const double v = number(path, fallback);
    if (has(path) && !(v > 0.0)) fail("{} must be positive", path);
    return v > 0.0 ? v : fallback;
  }

  int integer(const std::string& path, int fallback = 0) {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      fail("{} must be an integer", path);
      return fallback;
    }
    return v->get<int>();
  }

  bool boolean(const std::string& path, bool fallback = false) {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      fail("{} must be true or false", path);
      return fallback;
    }
    return v->get<bool>();
  }

  std::string string(const std::string& path, const std::vector<std::string>& allowed) {
    const json* v = find(path);
    if (!v) return allowed.front();
    if (!v->is_string() || std::find(allowed.begin(), allowed.end(), v->get<std::string>()) == allowed.end()) {
      fail("{} must be one of {}", path, fmt::join(allowed, ", "));
      return allowed.front();
    }
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& path) {
    std::vector<double> out;
    const json* v = find(path);
    if (!v) return out;
    if (!v->is_array() || v->empty()) {
      fail("{} must be a nonempty array of numbers", path);
      return out;
    }
    for (const auto& x : *v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        fail("{} must be a nonempty array of numbers", path);
        return {};
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& path) {
    std::vector<int> out;
    const json* v = find(path);
    if (!v) return out;
    if (!v->is_array() || v->empty()) {
      fail("{} must be a nonempty array of integers", path);
      return out;
    }
    for (const auto& x : *v) {
      if (!x.is_number_integer()) {
        fail("{} must be a nonempty array of integers", path);
        return {};
      }
      out.push_back(x.get<int>());
    }
    return out;
  }

  Grid grid(const std::string& path) {
    Grid g;
    const json* v = find(path);
    if (!v) return g;
    if (!v->is_array() || v->size() != 3 || !(*v)[0].is_number() || !(*v)[1].is_number() ||
        !(*v)[2].is_number_integer()) {
      fail("{} must be [lo, hi, points]", path);
      return g;
    }
    g.lo = (*v)[0].get<double>();
    g.hi = (*v)[1].get<double>();
    g.points = (*v)[2].get<int>();
    if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || !(g.hi > g.lo)) fail("{} needs finite lo < hi", path);
    if (g.points < 2 || g.points > 1'000'000) fail("{} needs between 2 and 1000000 points", path);
    return g;
  }

  template <typename... Args>
  void fail(fmt::format_string<Args...> f, Args&&... args) {
    errors_.push_back(fmt::format(f, std::forward<Args>(args)...));
  }

 private:
  const json& doc_;
  std::vector<std::string>& errors_;
};

std::pair<int, int> window_pair(Reader& r, const std::string& path) {
  const auto w = r.integers(path);
  if (w.size() != 2) {
    if (r.has(path)) r.fail("{} must be [mu_min, mu_max]", path);
    return {-1, 2};
  }
  if (w[0] > 0 || w[1] < 1) r.fail("{} must contain the levels 0 and 1, got [{}, {}]", path, w[0], w[1]);
  return {w[0], w[1]};
}

void check_margin(Reader& r, int order, int mu_min, int mu_max, const std::string& what) {
  if (order >= 2 && (mu_min > -order || mu_max < 1 + order)) {
    r.fail("order {} needs {} containing [{}, {}], got [{}, {}]", order, what, -order, 1 + order, mu_min, mu_max);
  }
}

EvolveJob read_evolve(Reader& r, json& resolved, JobKind kind) {
  EvolveJob job;
  const int n = r.integer("model.n_electrons", 1);
  if (r.has("model.n_electrons") && n < 1) r.fail("model.n_electrons must be at least 1");
  const bool ak = r.has("model.alpha") || r.has("model.kappa");
  const bool ed = r.has("model.epsilon") || r.has("model.delta");
  if (ak && ed) {
    r.fail("model takes either alpha/kappa or epsilon/delta, not both");
  } else if (!r.has("model.alpha") && !r.has("model.epsilon")) {
    r.fail("model needs alpha or epsilon");
  } else if (r.has("model.alpha")) {
    const double alpha = r.positive("model.alpha");
    const double kappa = r.number("model.kappa", 0.0);
    resolved["model"]["kappa"] = kappa;
    if (n >= 1) job.model = ModelParams{n, alpha / std::sqrt(static_cast<double>(n)), kappa * alpha};
  } else {
    const double epsilon = r.positive("model.epsilon");
    const double delta = r.number("model.delta", 0.0);
    resolved["model"]["delta"] = delta;
    if (n >= 1) job.model = ModelParams{n, epsilon, delta};
  }

  const auto [lo, hi] = window_pair(r, "basis.window");
  job.basis.mu_min = lo;
  job.basis.mu_max = hi;
  job.basis.n_max = r.integer("basis.n_max", 16);
  if (job.basis.n_max < 1) r.fail("basis.n_max must be at least 1");
  if (r.has("basis.charge")) job.basis.charge = r.integer("basis.charge");

  const std::string seed = r.string("seed.kind", {"fock", "coherent", "thermal"});
  job.seed.kind = seed == "fock" ? SeedKind::fock : seed == "coherent" ? SeedKind::coherent : SeedKind::thermal;
  job.seed.n0 = r.number("seed.n0", 0.0);
  if (job.seed.n0 < 0.0) r.fail("seed.n0 must be nonnegative");
  if (job.seed.kind == SeedKind::fock && job.seed.n0 != std::floor(job.seed.n0)) {
    r.fail("seed.n0 must be an integer for a fock seed");
  }

  job.generator = r.string("generator.kind", {"rotating", "effective"}) == "rotating" ? GeneratorKind::rotating
                                                                                     : GeneratorKind::effective;
  job.order = r.integer("generator.order", 1);
  if (job.order < 1 || job.order > 3) r.fail("generator.order must be 1, 2 or 3");
  job.averaging = r.string("generator.averaging", {"analytic", "averaged"}) == "analytic" ? AveragingMode::analytic
                                                                                        : AveragingMode::averaged;
  if (job.generator == GeneratorKind::effective) check_margin(r, job.order, lo, hi, "basis.window");

  job.tau_grid = r.grid("tau_grid");
  if (r.has("tau_grid") && job.tau_grid.lo != 0.0) r.fail("tau_grid must start at 0");

  auto& ic = job.integrator;
  ic.scheme = r.string("integrator.scheme", {"cf4", "rk4"}) == "cf4" ? Scheme::cf4 : Scheme::rk4;
  ic.dtau = r.positive("integrator.dtau", ic.dtau);
  ic.rtol = r.positive("integrator.rtol", ic.rtol);
  ic.max_halvings = r.integer("integrator.max_halvings", ic.max_halvings);
  ic.norm_threshold = r.positive("integrator.norm_threshold", ic.norm_threshold);
  ic.leakage_threshold = r.positive("integrator.leakage_threshold", ic.leakage_threshold);
  ic.hard_factor = r.positive("integrator.hard_factor", ic.hard_factor);
  try {
    validate(ic);
  } catch (const DomainError& e) {
    r.fail("integrator: {}", e.what());
  }
  (void)kind;
  return job;
}

JobSpec read_spec(JobKind kind, Reader& r, json& resolved) {
  switch (kind) {
    case JobKind::dispersion: {
      DispersionJob job;
      job.alpha = r.positive("alpha");
      job.kappa_grid = r.grid("kappa_grid");
      return job;
    }
    case JobKind::gain_curve: {
      GainCurveJob job;
      if (r.has("alphas") == r.has("physical")) r.fail("gain-curve takes exactly one of alphas or physical");
      job.alphas = r.numbers("alphas");
      for (double a : job.alphas) {
        if (!(a > 0.0)) r.fail("alphas must be positive");
      }
      if (r.has("physical")) {
        PhysicalBlock p;
        p.params.g = r.positive("physical.g");
        p.params.omega_r = r.positive("physical.omega_r");
        p.params.q = r.positive("physical.q");
        p.params.c = r.positive("physical.c");
        p.n_electrons = r.integer("physical.n_electrons", 1);
        if (p.n_electrons < 1) r.fail("physical.n_electrons must be at least 1");
        job.physical = p;
      }
      job.p_over_q_grid = r.grid("p_over_q_grid");
      return job;
    }
    case JobKind::evolve:
    case JobKind::variance:
      return read_evolve(r, resolved, kind);
    case JobKind::averaging_check: {
      AveragingJob job;
      job.n_electrons = r.integers("n_electrons");
      for (int n : job.n_electrons) {
        if (n < 1) r.fail("n_electrons must be at least 1");
      }
      const auto [lo, hi] = window_pair(r, "window");
      job.mu_min = lo;
      job.mu_max = hi;
      job.n_max = r.integer("n_max", 6);
      if (job.n_max < 1) r.fail("n_max must be at least 1");
      job.epsilon = r.positive("epsilon");
      job.delta = r.number("delta");
      job.orders = r.integers("orders");
      for (int k : job.orders) {
        if (k != 2 && k != 3) r.fail("orders may only contain 2 and 3");
        check_margin(r, k, lo, hi, "window");
      }
      job.tolerance = r.positive("tolerance");
      job.dump_operators = r.boolean("dump_operators");
      return job;
    }
    case JobKind::figure: {
      FigureJob job;
      const std::string f = r.string("figure", {"fig3", "fig4", "fig5", "fig6"});
      job.figure = f == "fig3" ? FigureKind::fig3 : f == "fig4" ? FigureKind::fig4 : f == "fig5" ? FigureKind::fig5 : FigureKind::fig6;
      job.log_scale = r.boolean("log_scale");
      if (job.figure == FigureKind::fig3) {
        job.kappas = r.numbers("kappas");
        job.ell_grid = r.grid("ell_grid");
      } else if (job.figure == FigureKind::fig5) {
        job.n0 = r.number("n0", 100.0);
        if (job.n0 < 0.0) r.fail("n0 must be nonnegative");
        job.kappa = r.number("kappa");
        job.ell_grid = r.grid("ell_grid");
      } else {
        job.alphas = r.numbers("alphas");
        for (double a : job.alphas) {
          if (!(a > 0.0)) r.fail("alphas must be positive");
        }
        job.p_over_q_grid = r.grid("p_over_q_grid");
      }
      if ((job.figure == FigureKind::fig3 || job.figure == FigureKind::fig5) && r.has("ell_grid") &&
          job.ell_grid.lo < 0.0) {
        r.fail("ell_grid must be nonnegative");
      }
      return job;
    }
  }
  return DispersionJob{};
}

std::string locate(const std::string& text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("{}:{}", line, column);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(violations.empty() ? "invalid config" : violations.front()),
      violations_(std::move(violations)) {}

const char* to_string(JobKind kind) {
  switch (kind) {
    case JobKind::dispersion: return "dispersion";
    case JobKind::gain_curve: return "gain-curve";
    case JobKind::evolve: return "evolve";
    case JobKind::variance: return "variance";
    case JobKind::averaging_check: return "averaging-check";
    case JobKind::figure: return "figure";
  }
  return "?";
}

const char* to_string(FigureKind kind) {
  switch (kind) {
    case FigureKind::fig3: return "fig3";
    case FigureKind::fig4: return "fig4";
    case FigureKind::fig5: return "fig5";
    case FigureKind::fig6: return "fig6";
  }
  return "?";
}

std::optional<JobKind> parse_job_kind(const std::string& name) {
  for (JobKind k : {JobKind::dispersion, JobKind::gain_curve, JobKind::evolve, JobKind::variance,
                    JobKind::averaging_check, JobKind::figure}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::vector<double> Grid::values() const {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  out.back() = hi;
  return out;
}

JobConfig validate_config_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({fmt::format("{}:{}: {}", origin, locate(text, e.byte), e.what())});
  }
  if (!doc.is_object()) throw ConfigError({"config must be a JSON object"});
  const auto kind_it = doc.find("kind");
  if (kind_it == doc.end()) throw ConfigError({"missing required key 'kind'"});
  const auto kind = kind_it->is_string() ? parse_job_kind(kind_it->get<std::string>()) : std::nullopt;
  if (!kind) {
    throw ConfigError({"kind must be one of dispersion, gain-curve, evolve, variance, averaging-check, figure"});
  }

  std::vector<std::string> errors;
  json resolved = merge(defaults_for(*kind, doc), doc, "", errors);
  Reader r(resolved, errors);
  JobConfig cfg;
  cfg.kind = *kind;
  cfg.workers = r.integer("workers", 0);
  if (cfg.workers < 0 || cfg.workers > 256) r.fail("workers must lie in [0, 256]");
  if (const json* out = r.find("out")) {
    if (out->is_string() && !out->get<std::string>().empty()) {
      cfg.out = out->get<std::string>();
    } else {
      r.fail("out must be a nonempty string");
    }
  }
  cfg.spec = read_spec(*kind, r, resolved);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  cfg.resolved = std::move(resolved);
  return cfg;
}

JobConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({fmt::format("cannot read config file {}", path.string())});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return validate_config_text(buffer.str(), path.string());
}

}  // namespace qfel::cli
