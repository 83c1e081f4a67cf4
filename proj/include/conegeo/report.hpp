#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace conegeo {

/// Accumulated |residual| samples plus a masked-point counter. Samples are
/// stored so max/mean/p99 merge associatively across sweep partitions.
struct Stat {
  std::vector<double> samples;
  long masked_count = 0;

  void add(double v) { samples.push_back(std::abs(v)); }
  void add_signed(double v) { samples.push_back(v); }
  void add_masked() { ++masked_count; }

  long count() const { return static_cast<long>(samples.size()); }
  double max() const {
    double m = 0;
    for (double s : samples) m = std::max(m, s);
    return m;
  }
  double min() const {
    if (samples.empty()) return 0;
    double m = samples.front();
    for (double s : samples) m = std::min(m, s);
    return m;
  }
  double mean() const {
    if (samples.empty()) return 0;
    double s = 0;
    for (double v : samples) s += v;
    return s / samples.size();
  }
  double p99() const {
    if (samples.empty()) return 0;
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    size_t idx = static_cast<size_t>(std::ceil(0.99 * sorted.size())) - 1;
    return sorted[std::min(idx, sorted.size() - 1)];
  }
  void merge(const Stat& o) {
    samples.insert(samples.end(), o.samples.begin(), o.samples.end());
    masked_count += o.masked_count;
  }
};

/// Named residual families with per-family pass bounds. A report passes when
/// every bounded family's max is within its bound and no refusal was flagged.
struct ResidualReport {
  std::string example;
  std::map<std::string, Stat> residuals;
  std::map<std::string, double> bounds;
  std::vector<std::string> flags;  // named refusals / inconclusive markers

  Stat& stat(const std::string& name) { return residuals[name]; }

  void set_bound(const std::string& name, double b) { bounds[name] = b; }

  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const auto& [name, st] : residuals) {
      auto it = bounds.find(name);
      if (it != bounds.end() && st.max() > it->second) out.push_back(name);
    }
    for (const auto& f : flags) out.push_back(f);
    return out;
  }

  bool pass() const { return failing().empty(); }

  void merge(const ResidualReport& o) {
    for (const auto& [name, st] : o.residuals) residuals[name].merge(st);
    for (const auto& [name, b] : o.bounds) bounds[name] = b;
    flags.insert(flags.end(), o.flags.begin(), o.flags.end());
  }
};

}  // namespace conegeo
