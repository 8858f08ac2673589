#include "mixopt/experiments/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mixopt::experiments {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + s +
                             "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void TimeSeries::check() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!std::isfinite(r.t) || !std::isfinite(r.mix_norm) || !std::isfinite(r.mass_drift) ||
        !std::isfinite(r.energy_drift_rel) || !std::isfinite(r.pairing_drift_rel))
      throw std::invalid_argument("TimeSeries: non-finite entry in row " + std::to_string(i));
    if (i && !(r.t > rows[i - 1].t))
      throw std::invalid_argument("TimeSeries: t not strictly increasing at row " +
                                  std::to_string(i));
  }
}

std::string series_csv(const TimeSeries& series) {
  std::string out = std::string(kSeriesHeader) + "\n";
  for (const auto& r : series.rows) {
    out += format_double(r.t) + "," + format_double(r.mix_norm) + "," +
           format_double(r.mass_drift) + "," + format_double(r.energy_drift_rel) + "," +
           format_double(r.pairing_drift_rel) + "\n";
  }
  return out;
}

void write_series_csv(const TimeSeries& series, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << series_csv(series);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != kSeriesHeader)
    throw std::runtime_error(path.string() + ": missing series header");
  TimeSeries series;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw std::runtime_error(path.string() + ": expected 5 columns");
    series.rows.push_back({parse_number(f[0], path, lineno), parse_number(f[1], path, lineno),
                           parse_number(f[2], path, lineno), parse_number(f[3], path, lineno),
                           parse_number(f[4], path, lineno)});
  }
  return series;
}

DecayFit fit_decay_rate(const TimeSeries& series, double t_a, double t_b) {
  std::vector<double> t;
  std::vector<double> y;
  for (const auto& r : series.rows) {
    if (r.t < t_a - 1e-12 || r.t > t_b + 1e-12) continue;
    if (!(r.mix_norm > 0.0))
      throw FitError("fit_decay_rate: mix_norm must be positive on the window (t = " +
                     format_double(r.t) + ")");
    t.push_back(r.t);
    y.push_back(-std::log(r.mix_norm));
  }
  if (t.size() < 3)
    throw FitError("fit_decay_rate: need at least 3 samples in [" + format_double(t_a) + ", " +
                   format_double(t_b) + "], found " + std::to_string(t.size()));
  DecayFit fit;
  fit.samples = t.size();
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
    fit.r_squared = 1.0;
    return fit;
  }
  const double n = static_cast<double>(t.size());
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxx += (t[i] - mt) * (t[i] - mt);
    sxy += (t[i] - mt) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.rate = sxy / sxx;
  fit.r_squared = (sxy * sxy) / (sxx * syy);
  return fit;
}

void emit_snapshot(const Mesh& mesh, const StateVector& theta, const std::filesystem::path& path) {
  if (theta.size() != mesh.num_cells())
    throw ShapeError("emit_snapshot: state does not match the mesh");
  auto out = open_out(path);
  std::string buf = "# mesh=" + mesh.kind_name() + " h=" + format_double(mesh.h()) + "\nx,y,value\n";
  for (const auto& c : mesh.cells()) {
    buf += format_double(c.centroid.x);
    buf += ',';
    buf += format_double(c.centroid.y);
    buf += ',';
    buf += format_double(theta[c.id]);
    buf += '\n';
  }
  out << buf;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  Snapshot snap;
  if (!std::getline(in, line) || line.rfind("# mesh=", 0) != 0)
    throw std::runtime_error(path.string() + ": missing snapshot header");
  const auto hpos = line.find(" h=");
  if (hpos == std::string::npos) throw std::runtime_error(path.string() + ": header lacks h");
  snap.mesh_kind = line.substr(7, hpos - 7);
  snap.h = parse_number(line.substr(hpos + 3), path, 1);
  if (!std::getline(in, line) || line != "x,y,value")
    throw std::runtime_error(path.string() + ": missing column line");
  std::vector<double> values;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw std::runtime_error(path.string() + ": expected 3 columns");
    snap.centroids.push_back({parse_number(f[0], path, lineno), parse_number(f[1], path, lineno)});
    values.push_back(parse_number(f[2], path, lineno));
  }
  snap.values = StateVector(std::move(values));
  return snap;
}

std::string snapshot_filename(double t) { return "snapshot_t" + format_double(t) + ".csv"; }

void write_schedule_csv(const ControlSchedule& schedule, const std::filesystem::path& path) {
  auto out = open_out(path);
  std::string buf = "n,t_n";
  for (std::size_t i = 0; i < schedule.num_modes(); ++i) buf += ",v_" + std::to_string(i + 1);
  buf += '\n';
  for (std::size_t n = 0; n < schedule.n_steps(); ++n) {
    buf += std::to_string(n) + "," + format_double(static_cast<double>(n) * schedule.dt());
    for (std::size_t i = 0; i < schedule.num_modes(); ++i)
      buf += "," + format_double(schedule(i, n));
    buf += '\n';
  }
  out << buf;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

ControlSchedule read_schedule_csv(const std::filesystem::path& path, double dt) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,t_n", 0) != 0)
    throw std::runtime_error(path.string() + ": missing schedule header");
  const std::size_t modes = split_csv(line).size() - 2;
  if (modes == 0) throw std::runtime_error(path.string() + ": schedule has no modes");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != modes + 2)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": wrong column count");
    const double n = parse_number(f[0], path, lineno);
    const double tn = parse_number(f[1], path, lineno);
    if (n != static_cast<double>(rows.size()))
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": rows must be numbered 0, 1, ...");
    if (std::abs(tn - n * dt) > 1e-9 * std::max(1.0, std::abs(tn)))
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": t_n does not match n * dt");
    std::vector<double> v;
    for (std::size_t i = 0; i < modes; ++i) v.push_back(parse_number(f[i + 2], path, lineno));
    rows.push_back(std::move(v));
  }
  ControlSchedule s(modes, rows.size(), dt);
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t i = 0; i < modes; ++i) s(i, n) = rows[n][i];
  return s;
}

}  // namespace mixopt::experiments
