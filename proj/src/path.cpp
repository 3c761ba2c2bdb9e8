#include "rnnsig/path.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "rnnsig/error.hpp"

namespace rnnsig {

void PathConfig::validate() const {
  require(std::isfinite(L) && L > 0.0 && L < 1.0, "PathConfig: L must lie in (0, 1)");
}

PiecewiseLinearPath::PiecewiseLinearPath(std::vector<double> times, std::vector<Vector> values)
    : times_(std::move(times)), values_(std::move(values)) {
  require(!times_.empty(), "path: needs at least one breakpoint");
  require(times_.size() == values_.size(), "path: times and values differ in length");
  require(!values_.front().empty(), "path: dimension must be positive");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    require(values_[k].size() == values_.front().size(), "path: all values must share a dimension");
    require(std::isfinite(times_[k]) && times_[k] >= 0.0 && times_[k] <= 1.0, "path: times must lie in [0, 1]");
    if (k > 0) require(times_[k] > times_[k - 1], "path: times must be strictly increasing");
  }
}

Vector PiecewiseLinearPath::evaluate(double t) const {
  require(t >= 0.0 && t <= 1.0, "path: evaluation time outside [0, 1]");
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin());
  const double t0 = times_[k - 1];
  const double t1 = times_[k];
  const double w = (t - t0) / (t1 - t0);
  Vector out(dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[k - 1][i] + w * (values_[k][i] - values_[k - 1][i]);
  return out;
}

PiecewiseLinearPath PiecewiseLinearPath::restrict_to(double s, double t) const {
  require(s >= 0.0 && s <= t && t <= 1.0, "path: restriction interval must satisfy 0 <= s <= t <= 1");
  std::vector<double> times{s};
  std::vector<Vector> values{evaluate(s)};
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (times_[k] > s && times_[k] < t) {
      times.push_back(times_[k]);
      values.push_back(values_[k]);
    }
  }
  if (t > s) {
    times.push_back(t);
    values.push_back(evaluate(t));
  }
  return PiecewiseLinearPath(std::move(times), std::move(values));
}

std::vector<Vector> PiecewiseLinearPath::sample(std::size_t T) const {
  require(T >= 1, "path: sample count must be positive");
  std::vector<Vector> out;
  out.reserve(T);
  for (std::size_t j = 1; j <= T; ++j) out.push_back(evaluate(static_cast<double>(j) / static_cast<double>(T)));
  return out;
}

PiecewiseLinearPath from_samples(std::span<const Vector> samples) {
  require(!samples.empty(), "from_samples: empty sample");
  const std::size_t T = samples.size();
  std::vector<double> times(T + 1);
  std::vector<Vector> values;
  values.reserve(T + 1);
  values.emplace_back(samples.front().size(), 0.0);
  times[0] = 0.0;
  for (std::size_t j = 1; j <= T; ++j) {
    times[j] = static_cast<double>(j) / static_cast<double>(T);
    values.push_back(samples[j - 1]);
  }
  times[T] = 1.0;
  return PiecewiseLinearPath(std::move(times), std::move(values));
}

double total_variation(const PiecewiseLinearPath& path, double s, double t) {
  require(s >= 0.0 && s <= t && t <= 1.0, "total_variation: interval must satisfy 0 <= s <= t <= 1");
  if (s == t) return 0.0;
  const PiecewiseLinearPath r = path.restrict_to(s, t);
  double tv = 0.0;
  const auto vals = r.values();
  for (std::size_t k = 1; k < vals.size(); ++k) {
    double sq = 0.0;
    for (std::size_t i = 0; i < vals[k].size(); ++i) {
      const double dx = vals[k][i] - vals[k - 1][i];
      sq += dx * dx;
    }
    tv += std::sqrt(sq);
  }
  return tv;
}

NormalizedPath normalize(const PiecewiseLinearPath& path, const PathConfig& config) {
  config.validate();
  const double tv = total_variation(path);
  const double scale = tv > config.L ? config.L / tv : 1.0;
  const Vector x0 = path.values().front();
  std::vector<Vector> values(path.values().begin(), path.values().end());
  for (Vector& v : values)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] - x0[i]) * scale;
  std::vector<double> times(path.times().begin(), path.times().end());
  return {PiecewiseLinearPath(std::move(times), std::move(values)), scale};
}

PiecewiseLinearPath time_augment(const PiecewiseLinearPath& path, const PathConfig& config) {
  config.validate();
  const double rate = (1.0 - config.L) / 2.0;
  std::vector<double> times(path.times().begin(), path.times().end());
  std::vector<Vector> values;
  values.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    Vector v = path.values()[k];
    v.push_back(rate * times[k]);
    values.push_back(std::move(v));
  }
  // A path that does not reach t = 1 still gets its time channel on [0, 1].
  if (times.back() < 1.0) {
    Vector v = path.values().back();
    v.push_back(rate);
    times.push_back(1.0);
    values.push_back(std::move(v));
  }
  if (times.front() > 0.0) {
    Vector v = path.values().front();
    v.push_back(0.0);
    times.insert(times.begin(), 0.0);
    values.insert(values.begin(), std::move(v));
  }
  return PiecewiseLinearPath(std::move(times), std::move(values));
}

PiecewiseLinearPath stop_at(const PiecewiseLinearPath& path, std::size_t j, std::size_t T) {
  require(T >= 1 && j <= T, "stop_at: need j <= T and T >= 1");
  if (j == T) return path;
  const double u = static_cast<double>(j) / static_cast<double>(T);
  std::vector<double> times;
  std::vector<Vector> values;
  for (std::size_t k = 0; k < path.num_points(); ++k) {
    if (path.times()[k] < u) {
      times.push_back(path.times()[k]);
      values.push_back(path.values()[k]);
    }
  }
  const Vector xu = path.evaluate(u);
  times.push_back(u);
  values.push_back(xu);
  times.push_back(1.0);
  values.push_back(xu);
  return PiecewiseLinearPath(std::move(times), std::move(values));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<Vector> read_samples_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(static_cast<bool>(in), "read_samples_csv: cannot open " + file.string());
  std::vector<Vector> rows;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    Vector row(cells.size());
    bool ok = true;
    for (std::size_t i = 0; i < cells.size() && ok; ++i) ok = parse_double(cells[i], row[i]);
    if (!ok) {
      require(first, "read_samples_csv: non-numeric cell on line " + std::to_string(lineno));
      first = false;
      continue;
    }
    first = false;
    require(rows.empty() || row.size() == rows.front().size(),
            "read_samples_csv: ragged row on line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "read_samples_csv: no samples in " + file.string());
  return rows;
}

void write_samples_csv(const std::filesystem::path& file, std::span<const Vector> samples) {
  std::ofstream out(file);
  require(static_cast<bool>(out), "write_samples_csv: cannot open " + file.string());
  out << std::setprecision(17);
  for (const Vector& row : samples) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

}  // namespace rnnsig
