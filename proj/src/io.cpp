#include "vmtorus/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace vmtorus {
namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool is_number(const std::string& token) {
  try {
    parse_double(token);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  return in;
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v(i));
  }
  return out;
}

std::string join_matrix(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd row_major = m.transpose();
  return join(row_major.reshaped());
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::istringstream ss(text);
  std::vector<double> values;
  std::string token;
  while (ss >> token) values.push_back(parse_double(token));
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd parse_matrix(const std::string& text, Eigen::Index p) {
  const Eigen::VectorXd v = parse_vector(text);
  if (v.size() != p * p) throw Error(ErrorKind::kParse, "fit report: matrix has the wrong number of entries");
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = v(i * p + j);
  return m;
}

Eigen::VectorXd json_vector(const nlohmann::json& j) {
  std::vector<double> v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

SineParams json_params(const nlohmann::json& j) {
  const Eigen::VectorXd kappa = json_vector(j.at("kappa"));
  const Eigen::Index p = kappa.size();
  const Eigen::VectorXd mu = j.contains("mu") ? json_vector(j.at("mu")) : Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(p, p);
  if (j.contains("lambda")) {
    const auto& l = j.at("lambda");
    if (l.is_number()) {
      require(p == 2, "scenario: scalar lambda is only valid for bivariate blocks");
      lambda(0, 1) = lambda(1, 0) = l.get<double>();
    } else {
      const auto rows = l.get<std::vector<std::vector<double>>>();
      require(static_cast<Eigen::Index>(rows.size()) == p, "scenario: lambda must be p x p");
      for (Eigen::Index i = 0; i < p; ++i) {
        require(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) == p,
                "scenario: lambda must be p x p");
        for (Eigen::Index k = 0; k < p; ++k) lambda(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      }
    }
  }
  return make_params(mu, kappa, lambda);
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  const std::string t = trim(token);
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  auto res = std::from_chars(first, last, value);
  if (t.empty() || res.ec != std::errc() || res.ptr != last)
    throw Error(ErrorKind::kParse, "not a number: '" + token + "'");
  return value;
}

AngleTable read_angle_table(std::istream& in, bool degrees) {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (header.empty() && rows.empty() && !std::all_of(cells.begin(), cells.end(), is_number)) {
      header = cells;
      width = cells.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                         " columns, found " + std::to_string(cells.size()));
    std::vector<double> values;
    values.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        values.push_back(parse_double(c));
      } catch (const Error&) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": non-numeric cell '" + c + "'");
      }
      if (!std::isfinite(values.back()))
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": non-finite cell '" + c + "'");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::kParse, "angle table has no data rows");

  std::optional<std::size_t> mask_col;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == "outlier") mask_col = c;
  const std::size_t p = width - (mask_col ? 1 : 0);
  if (p == 0) throw Error(ErrorKind::kParse, "angle table has no angle columns");

  AngleTable table;
  Eigen::MatrixXd angles(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  std::vector<bool> mask;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (mask_col && c == *mask_col) {
        mask.push_back(rows[i][c] != 0.0);
        continue;
      }
      angles(static_cast<Eigen::Index>(i), j++) = degrees ? rows[i][c] * kDegree : rows[i][c];
    }
  }
  table.sample = TorusSample(angles);
  for (std::size_t c = 0; c < width; ++c) {
    if (mask_col && c == *mask_col) continue;
    table.columns.push_back(header.empty() ? "theta" + std::to_string(table.columns.size() + 1) : header[c]);
  }
  if (mask_col) table.outlier = std::move(mask);
  return table;
}

AngleTable read_angle_table_file(const std::string& path, bool degrees) {
  auto in = open_input(path);
  return read_angle_table(in, degrees);
}

void write_angle_table(std::ostream& out, const Eigen::MatrixXd& angles, const std::vector<bool>* outlier,
                       bool degrees) {
  for (Eigen::Index j = 0; j < angles.cols(); ++j) out << (j ? "," : "") << "theta" << j + 1;
  if (outlier) out << ",outlier";
  out << '\n';
  for (Eigen::Index i = 0; i < angles.rows(); ++i) {
    for (Eigen::Index j = 0; j < angles.cols(); ++j)
      out << (j ? "," : "") << format_double(degrees ? angles(i, j) / kDegree : angles(i, j));
    if (outlier) out << ',' << ((*outlier)[static_cast<std::size_t>(i)] ? 1 : 0);
    out << '\n';
  }
}

void write_fit_report(std::ostream& out, const FitReport& report) {
  const FitResult& f = report.fit;
  out << "# vmtorus fit report\n";
  out << "method: " << report.method << '\n';
  out << "n: " << f.weights.size() << '\n';
  out << "p: " << f.params.dims() << '\n';
  out << "mu: " << join(f.params.mu) << '\n';
  out << "kappa: " << join(f.params.kappa) << '\n';
  out << "lambda: " << join_matrix(f.params.lambda) << '\n';
  out << "sigma_hat: " << join_matrix(f.sigma_hat) << '\n';
  out << "pd_flag: " << (f.pd_flag ? 1 : 0) << '\n';
  out << "converged: " << (f.converged ? 1 : 0) << '\n';
  out << "iterations: " << f.iterations << '\n';
  out << "sum_weights: " << format_double(f.sum_weights) << '\n';
  out << "downweighting_level: " << format_double(f.downweighting_level()) << '\n';
  out << "root_score: " << format_double(f.root_score) << '\n';
  out << "start: " << f.start << '\n';
  out << "distinct_roots: " << f.distinct_roots << '\n';
  out << "failed_starts: " << f.failed_starts << '\n';
  if (report.config) {
    const WleConfig& c = *report.config;
    out << "kstar: " << format_double(c.kstar) << '\n';
    out << "raf: " << c.raf.name() << '\n';
    out << "raf_parameter: " << format_double(c.raf.parameter()) << '\n';
    out << "max_iter: " << c.max_iter << '\n';
    out << "tol: " << format_double(c.tol) << '\n';
    out << "n_starts: " << c.n_starts << '\n';
    out << "subsample_size: " << c.subsample_size << '\n';
    out << "root_threshold: " << format_double(c.root_threshold) << '\n';
    out << "init_rule: " << (c.init_rule == InitOffDiagonal::kLiteral ? "literal" : "correlation") << '\n';
  }
  out << "seed: " << report.seed << '\n';
  out << "[observations]\n";
  out << "index,weight,residual\n";
  for (Eigen::Index i = 0; i < f.weights.size(); ++i)
    out << i << ',' << format_double(f.weights(i)) << ',' << format_double(f.residuals(i)) << '\n';
}

FitReport read_fit_report(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  bool observations = false;
  std::vector<double> weights, residuals;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t == "[observations]") {
      observations = true;
      std::getline(in, line);  // column header
      continue;
    }
    if (observations) {
      const auto cells = split(t, ',');
      if (cells.size() != 3) throw Error(ErrorKind::kParse, "fit report: malformed observation line '" + t + "'");
      weights.push_back(parse_double(cells[1]));
      residuals.push_back(parse_double(cells[2]));
      continue;
    }
    const auto colon = t.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::kParse, "fit report: malformed line '" + t + "'");
    kv[trim(t.substr(0, colon))] = trim(t.substr(colon + 1));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::kParse, "fit report: missing field '" + key + "'");
    return it->second;
  };
  auto get_int = [&](const std::string& key) { return static_cast<int>(parse_double(get(key))); };

  FitReport report;
  report.method = get("method");
  const auto p = static_cast<Eigen::Index>(get_int("p"));
  FitResult& f = report.fit;
  try {
    f.params = make_params(parse_vector(get("mu")), parse_vector(get("kappa")), parse_matrix(get("lambda"), p));
  } catch (const Error& e) {
    throw Error(ErrorKind::kParse, std::string("fit report: invalid parameters: ") + e.what());
  }
  f.sigma_hat = parse_matrix(get("sigma_hat"), p);
  f.pd_flag = get_int("pd_flag") != 0;
  f.converged = get_int("converged") != 0;
  f.iterations = get_int("iterations");
  f.sum_weights = parse_double(get("sum_weights"));
  f.root_score = parse_double(get("root_score"));
  f.start = get_int("start");
  f.distinct_roots = get_int("distinct_roots");
  f.failed_starts = get_int("failed_starts");
  f.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  f.residuals = Eigen::Map<Eigen::VectorXd>(residuals.data(), static_cast<Eigen::Index>(residuals.size()));
  if (f.weights.size() != get_int("n")) throw Error(ErrorKind::kParse, "fit report: observation count mismatch");
  report.seed = std::stoull(get("seed"));
  if (kv.count("kstar")) {
    WleConfig c;
    c.kstar = parse_double(get("kstar"));
    c.raf = RafSpec::parse(get("raf"), parse_double(get("raf_parameter")));
    c.max_iter = get_int("max_iter");
    c.tol = parse_double(get("tol"));
    c.n_starts = get_int("n_starts");
    c.subsample_size = get_int("subsample_size");
    c.root_threshold = parse_double(get("root_threshold"));
    c.init_rule = get("init_rule") == "literal" ? InitOffDiagonal::kLiteral : InitOffDiagonal::kCorrelationScaled;
    c.seed = report.seed;
    report.config = c;
  }
  return report;
}

FitReport read_fit_report_file(const std::string& path) {
  auto in = open_input(path);
  return read_fit_report(in);
}

void write_estimate_summary(std::ostream& out, const std::string& label, const SineParams& params) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(2) << std::left << std::setw(6) << label;
  for (Eigen::Index j = 0; j < params.dims(); ++j) out << std::right << std::setw(8) << params.mu(j);
  for (Eigen::Index j = 0; j < params.dims(); ++j) out << std::right << std::setw(8) << params.kappa(j);
  const Eigen::VectorXd lam = upper_triangle(params.lambda);
  for (Eigen::Index j = 0; j < lam.size(); ++j) out << std::right << std::setw(8) << lam(j);
  out << '\n';
  out.flags(flags);
  out.precision(precision);
}

ScenarioFile read_scenario(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("scenario: ") + e.what());
  }
  try {
    ScenarioFile file;
    ScenarioSpec& s = file.scenario;
    s.name = j.value("name", std::string("scenario"));
    if (j.contains("blocks")) {
      for (const auto& b : j.at("blocks")) s.blocks.push_back(json_params(b));
      s.true_params = join_blocks(s.blocks);
    } else {
      s.true_params = json_params(j.at("params"));
    }
    s.n = j.value("n", 250);
    if (j.contains("gibbs")) {
      s.gibbs.burn_in = j.at("gibbs").value("burn_in", s.gibbs.burn_in);
      s.gibbs.thinning = j.at("gibbs").value("thinning", s.gibbs.thinning);
    }
    if (j.contains("contamination") && !j.at("contamination").is_null()) {
      const auto& c = j.at("contamination");
      const auto dims = c.at("dims").get<std::vector<Eigen::Index>>();
      const std::string mode = c.value("mode", std::string("append"));
      require(mode == "append" || mode == "replace", "scenario: contamination mode must be append or replace");
      ContaminationSpec spec = default_contamination(
          c.value("n_outliers", 50), dims, mode == "append" ? ContaminationMode::kAppend : ContaminationMode::kReplace);
      if (c.contains("shift")) spec.shift = json_vector(c.at("shift"));
      if (c.contains("concentration")) spec.concentration = json_vector(c.at("concentration"));
      if (c.contains("center")) spec.center = json_vector(c.at("center"));
      s.contamination = spec;
    }
    s.validate();
    if (j.contains("wle")) {
      const auto& w = j.at("wle");
      WleConfig& c = file.wle;
      c.kstar = w.value("kstar", c.kstar);
      c.raf = RafSpec::parse(w.value("raf", std::string("schi")),
                             w.value("raf_parameter", w.value("raf", std::string("schi")) == "pwd" ? 0.5 : 1.0));
      c.max_iter = w.value("max_iter", c.max_iter);
      c.tol = w.value("tol", c.tol);
      c.n_starts = w.value("n_starts", c.n_starts);
      c.subsample_size = w.value("subsample_size", c.subsample_size);
      c.root_threshold = w.value("root_threshold", c.root_threshold);
    }
    file.wle.validate(s.dims());
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("scenario: ") + e.what());
  }
}

ScenarioFile read_scenario_file(const std::string& path) {
  auto in = open_input(path);
  return read_scenario(in);
}

std::vector<double> parse_grid(const std::string& spec) {
  auto bad = [&] { return Error(ErrorKind::kInvalidArgument, "malformed k* grid '" + spec + "'"); };
  std::vector<double> grid;
  try {
    if (spec.find(':') != std::string::npos) {
      const auto parts = split(spec, ':');
      if (parts.size() != 3) throw bad();
      const double start = parse_double(parts[0]);
      const double stop = parse_double(parts[1]);
      const double step = parse_double(parts[2]);
      if (!(step > 0.0) || !(stop >= start) || !std::isfinite(stop)) throw bad();
      const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
      if (count > 100000) throw bad();
      for (long k = 0; k < count; ++k) grid.push_back(start + static_cast<double>(k) * step);
    } else {
      for (const auto& cell : split(spec, ',')) grid.push_back(parse_double(cell));
    }
  } catch (const Error&) {
    throw bad();
  }
  if (grid.empty()) throw bad();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw bad();
    if (i > 0 && !(grid[i] > grid[i - 1])) throw bad();
  }
  return grid;
}

}  // namespace vmtorus
