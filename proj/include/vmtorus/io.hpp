#pragma once

// Text formats: angle tables (CSV), fit reports and Monte Carlo scenario files (JSON).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vmtorus/estimator.hpp"
#include "vmtorus/experiments.hpp"

namespace vmtorus {

/// Shortest representation that parses back to the same double ("nan", "inf" for non-finite).
std::string format_double(double x);

/// Strict parse of a whole token; throws kParse.
double parse_double(const std::string& token);

struct AngleTable {
  TorusSample sample;
  std::vector<std::string> columns;      // header names, or theta1..thetap
  std::optional<std::vector<bool>> outlier;  // "outlier" column when present
};

/// Comma-separated, optional header row, one observation per row. A column named "outlier"
/// is read as a 0/1 mask and excluded from the angles. Values are wrapped; with degrees = true
/// they are converted to radians first.
AngleTable read_angle_table(std::istream& in, bool degrees = false);
AngleTable read_angle_table_file(const std::string& path, bool degrees = false);

/// Header theta1..thetap (plus outlier when a mask is given).
void write_angle_table(std::ostream& out, const Eigen::MatrixXd& angles, const std::vector<bool>* outlier = nullptr,
                       bool degrees = false);

struct FitReport {
  std::string method;  // "mle" or "wle"
  FitResult fit;
  std::optional<WleConfig> config;
  std::uint64_t seed = kDefaultSeed;
};

/// Key-value lines ("key: values") followed by an [observations] CSV block of weights and residuals.
void write_fit_report(std::ostream& out, const FitReport& report);
FitReport read_fit_report(std::istream& in);
FitReport read_fit_report_file(const std::string& path);

/// Fixed-width table in the style of a parameter-estimate table, rounded to 2 decimals.
void write_estimate_summary(std::ostream& out, const std::string& label, const SineParams& params);

struct ScenarioFile {
  ScenarioSpec scenario;
  WleConfig wle;
};

ScenarioFile read_scenario(std::istream& in);
ScenarioFile read_scenario_file(const std::string& path);

/// "start:stop:step" (inclusive stop) or a comma-separated list. Throws kInvalidArgument.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace vmtorus
