#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfel/cli/config.hpp"

namespace qfel::cli {

// A module failed while running a job; the message names the job.
class JobError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::filesystem::path out_dir = "qfel-out";
  bool svg = false;
  bool audit = false;
};

struct FileEntry {
  std::string name;
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunReport {
  json job;
  std::vector<FileEntry> files;
  json audit = json::object();
  json checks = json::array();
  json notes = json::array();
  double wall_seconds = 0.0;
  // any audit flag raised (norm drift, leakage, unconverged step halving)
  bool audit_flagged = false;

  json to_json() const;
};

/// Executes a validated job, writes its files plus report.json into the
/// output directory and returns the report. On failure every file this run
/// created is removed and JobError is thrown.
RunReport run(const JobConfig& job, const RunOptions& options);

std::string sha256_hex(const std::string& bytes);

/// Shortest round-trip decimal, "nan" for NaN.
std::string format_number(double v);

}  // namespace qfel::cli
