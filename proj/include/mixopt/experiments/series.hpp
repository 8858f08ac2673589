#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixopt/mesh.hpp"
#include "mixopt/transport.hpp"

namespace mixopt::experiments {

struct SeriesRow {
  double t = 0.0;
  double mix_norm = 0.0;
  double mass_drift = 0.0;         ///< max |M(theta^n) - M(theta^0)| since the previous row
  double energy_drift_rel = 0.0;   ///< max |E(theta^n) - E(theta^0)| / E(theta^0)
  double pairing_drift_rel = 0.0;  ///< max |<theta^n, rho^n> - <theta^N, rho^N>| / |<theta^N, rho^N>|
};

struct TimeSeries {
  std::vector<SeriesRow> rows;

  /// Throws std::invalid_argument unless t increases strictly and every
  /// entry is finite.
  void check() const;
};

inline constexpr const char* kSeriesHeader =
    "t,mix_norm,mass_drift,energy_drift_rel,pairing_drift_rel";

void write_series_csv(const TimeSeries& series, const std::filesystem::path& path);
std::string series_csv(const TimeSeries& series);
TimeSeries read_series_csv(const std::filesystem::path& path);

class FitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of -ln(mix_norm) against t over rows with
/// t in [t_a, t_b], plus the coefficient of determination. A series whose
/// log is constant gets rate 0 and r^2 = 1.
DecayFit fit_decay_rate(const TimeSeries& series, double t_a, double t_b);

/// CSV of (x, y, value) at cell centroids in cell-id order, preceded by the
/// header line "# mesh=<kind> h=<h>" and the column line "x,y,value".
void emit_snapshot(const Mesh& mesh, const StateVector& theta, const std::filesystem::path& path);

struct Snapshot {
  std::string mesh_kind;
  double h = 0.0;
  std::vector<Point> centroids;
  StateVector values;
};
Snapshot read_snapshot(const std::filesystem::path& path);

/// "snapshot_t<value>.csv" with the shortest round-trip spelling of t.
std::string snapshot_filename(double t);

/// Writes the schedule as "n,t_n,v_1,...,v_m", one row per interval.
void write_schedule_csv(const ControlSchedule& schedule, const std::filesystem::path& path);
/// Reads a schedule CSV written for time step `dt`; the t_n column must
/// equal n dt.
ControlSchedule read_schedule_csv(const std::filesystem::path& path, double dt);

/// Shortest decimal spelling that parses back to the same double.
std::string format_double(double v);

}  // namespace mixopt::experiments
