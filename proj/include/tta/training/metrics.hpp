#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tta {

/// One logged scalar, the atom of every CSV report.
struct MetricRecord {
  long step = 0;
  std::string split;   // train | val | testA | testB
  std::string task;    // primary | secondary
  std::string metric;  // loss | accuracy | ...
  double value = 0;
};

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

class MetricLog {
 public:
  void add(long step, std::string split, std::string task, std::string metric, double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("metric log: non-finite value for " + metric);
    records_.push_back({step, std::move(split), std::move(task), std::move(metric), value});
  }

  /// Divergence diagnostics are the one deliberate exception to the
  /// finite-value invariant; they are flagged, not silently dropped.
  void add_diagnostic(long step, const std::string& note) {
    records_.push_back({step, "train", "run", note, 1.0});
  }

  const std::vector<MetricRecord>& records() const { return records_; }

  void write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << "step,split,task,metric,value\n";
    for (const auto& r : records_)
      f << r.step << "," << r.split << "," << r.task << "," << r.metric << "," << format_value(r.value)
        << "\n";
  }

 private:
  std::vector<MetricRecord> records_;
};

}  // namespace tta
