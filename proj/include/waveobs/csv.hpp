#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "waveobs/errors.hpp"
#include "waveobs/newmark.hpp"
#include "waveobs/observability.hpp"
#include "waveobs/spectral.hpp"

namespace waveobs {

/// Shortest round-trip decimal form of a double (17 significant digits where
/// needed); locale-independent.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class io_error : public std::runtime_error {
public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Minimal CSV writer: UTF-8, comma-separated, LF line endings, header row.
class CsvWriter {
public:
  explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw io_error("cannot open for writing: " + path);
  }

  void header(const std::vector<std::string>& names) { line(names); }

  void line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw io_error("write failed: " + path_);
  }

  void close() {
    out_.close();
    if (!out_) throw io_error("close failed: " + path_);
  }

private:
  std::string path_;
  std::ofstream out_;
};

inline void write_signal_csv(const std::string& path, const ObservationSignal& sig,
                             const std::string& first = "y1", const std::string& second = "y2") {
  CsvWriter csv(path);
  csv.header({"t", first, second});
  for (std::size_t k = 0; k < sig.samples.size(); ++k)
    csv.line({format_double(k * sig.dt), format_double(sig.samples[k][0]),
              format_double(sig.samples[k][1])});
  csv.close();
}

inline void write_trajectory_energy_csv(const std::string& path, const OperatorSet& ops,
                                        const Trajectory& traj) {
  CsvWriter csv(path);
  csv.header({"t", "energy"});
  for (std::size_t k = 0; k < traj.samples.size(); ++k)
    csv.line({format_double(traj.time_grid.time(static_cast<int>(k))),
              format_double(energy(ops, traj.samples[k]))});
  csv.close();
}

inline void write_spectrum_csv(const std::string& path, const Spectrum& spec) {
  CsvWriter csv(path);
  csv.header({"n", "mu", "lambda", "phi1", "mode_observability"});
  for (const auto& p : spec.pairs)
    csv.line({std::to_string(p.index), format_double(p.mu), format_double(p.freq),
              format_double(p.psi[0]), format_double(mode_observability(p, spec.grid.h))});
  csv.close();
}

} // namespace waveobs
