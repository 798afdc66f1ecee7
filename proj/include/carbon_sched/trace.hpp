#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "carbon_sched/core.hpp"

namespace carbon_sched {

struct TraceSample {
  double timestamp_s = 0.0;
  CarbonIntensity intensity;
};

// Time-ordered carbon-intensity samples, held as a step function.
class CarbonTrace {
 public:
  explicit CarbonTrace(std::vector<TraceSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw TraceError("carbon trace is empty");
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (!(samples_[i].timestamp_s > samples_[i - 1].timestamp_s)) {
        throw TraceError("trace timestamps must increase strictly (row " + std::to_string(i + 1) + ")");
      }
    }
  }

  const std::vector<TraceSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double start_s() const { return samples_.front().timestamp_s; }
  double last_s() const { return samples_.back().timestamp_s; }

  // Value of the latest sample at or before t; the first value before the trace starts.
  CarbonIntensity intensity_at(double t) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double x, const TraceSample& s) { return x < s.timestamp_s; });
    if (it == samples_.begin()) return samples_.front().intensity;
    return std::prev(it)->intensity;
  }

  double mean_intensity() const {
    double sum = 0.0;
    for (const auto& s : samples_) sum += s.intensity.value();
    return sum / static_cast<double>(samples_.size());
  }

 private:
  std::vector<TraceSample> samples_;
};

inline CarbonIntensity intensity_at(const CarbonTrace& trace, double t) { return trace.intensity_at(t); }

// CSV with header `timestamp_s,gco2_per_kwh`.
inline CarbonTrace parse_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TraceError("carbon trace is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp_s,gco2_per_kwh") throw TraceError("trace header must be 'timestamp_s,gco2_per_kwh'");
  std::vector<TraceSample> samples;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw TraceError("trace row " + std::to_string(row) + " has no comma");
    double ts = 0.0;
    double ci = 0.0;
    try {
      std::size_t used = 0;
      ts = std::stod(line.substr(0, comma), &used);
      ci = std::stod(line.substr(comma + 1), &used);
    } catch (const std::exception&) {
      throw TraceError("trace row " + std::to_string(row) + " is not numeric");
    }
    if (!(ci >= 0.0) || !std::isfinite(ci)) {
      throw TraceError("trace row " + std::to_string(row) + " has a negative or non-finite intensity");
    }
    samples.push_back({ts, CarbonIntensity(ci)});
  }
  return CarbonTrace(std::move(samples));
}

inline CarbonTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file " + path);
  return parse_trace(in);
}

}  // namespace carbon_sched
