#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qfel/dynamics.hpp"
#include "qfel/hamiltonians.hpp"
#include "qfel/model_params.hpp"

namespace qfel::cli {

using nlohmann::json;

// Config could not be parsed or failed validation; carries every violation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

enum class JobKind { dispersion, gain_curve, evolve, variance, averaging_check, figure };
enum class FigureKind { fig3, fig4, fig5, fig6 };

const char* to_string(JobKind kind);
const char* to_string(FigureKind kind);
std::optional<JobKind> parse_job_kind(const std::string& name);

/// [lo, hi] with `points` evenly spaced samples, both ends included.
struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  int points = 2;

  std::vector<double> values() const;
};

struct DispersionJob {
  double alpha = 0.1;
  Grid kappa_grid;
};

struct PhysicalBlock {
  PhysicalParams params;
  int n_electrons = 1;
};

struct GainCurveJob {
  std::vector<double> alphas;
  std::optional<PhysicalBlock> physical;
  Grid p_over_q_grid;
};

struct BasisBlock {
  int mu_min = -1;
  int mu_max = 2;
  int n_max = 16;
  std::optional<int> charge;
};

enum class GeneratorKind { rotating, effective };

struct EvolveJob {
  ModelParams model;
  BasisBlock basis;
  PhotonSeed seed;
  GeneratorKind generator = GeneratorKind::rotating;
  int order = 1;
  AveragingMode averaging = AveragingMode::analytic;
  Grid tau_grid;
  IntegratorConfig integrator;
};

struct AveragingJob {
  std::vector<int> n_electrons;
  int mu_min = -3;
  int mu_max = 4;
  int n_max = 6;
  double epsilon = 0.1;
  double delta = 0.0;
  std::vector<int> orders;
  double tolerance = 1e-12;
  bool dump_operators = false;
};

struct FigureJob {
  FigureKind figure = FigureKind::fig3;
  std::vector<double> kappas;
  std::vector<double> alphas;
  Grid ell_grid;
  Grid p_over_q_grid;
  double kappa = 0.0;
  double n0 = 100.0;
  bool log_scale = false;
};

using JobSpec = std::variant<DispersionJob, GainCurveJob, EvolveJob, AveragingJob, FigureJob>;

struct JobConfig {
  JobKind kind = JobKind::dispersion;
  JobSpec spec;
  // fully defaulted document, echoed into the run report
  json resolved;
  std::optional<std::string> out;
  // 0 picks the hardware concurrency
  int workers = 0;
};

JobConfig validate_config(const std::filesystem::path& path);
/// `origin` prefixes parse error locations.
JobConfig validate_config_text(const std::string& text, const std::string& origin = "<config>");

}  // namespace qfel::cli
