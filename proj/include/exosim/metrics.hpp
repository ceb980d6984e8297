// Outcome metrics: torque smoothness, transparency (harness forces) and
// ankle-torque statistics, plus factor-wise comparison across strategies,
// ankle configurations and loads.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exosim/core.hpp"
#include "exosim/sim_engine.hpp"

namespace exosim {

inline constexpr double kDefaultJumpThreshold = 5.0;  // N·m per sample

/// Per-joint sample-to-sample jumps of the applied torque.
struct SmoothnessReport {
  std::array<double, kJointCount> max_jump{};        // N·m
  std::array<double, kJointCount> rms_rate{};        // N·m/s
  std::array<long, kJointCount> jumps_above{};       // count of |Δτ| > threshold
  double overall_max_jump = 0.0;
  double threshold = kDefaultJumpThreshold;
  long diff_count = 0;
};

inline SmoothnessReport smoothness_metrics(const RunRecord& rec,
                                           double threshold = kDefaultJumpThreshold) {
  if (rec.samples.size() < 2)
    throw ValidationError("smoothness: record needs at least 2 samples");
  SmoothnessReport r;
  r.threshold = threshold;
  std::array<double, kJointCount> sumsq{};
  for (size_t k = 1; k < rec.samples.size(); ++k) {
    for (int j = 0; j < kJointCount; ++j) {
      const double jump = std::abs(rec.samples[k].applied[j] - rec.samples[k - 1].applied[j]);
      r.max_jump[j] = std::max(r.max_jump[j], jump);
      sumsq[j] += jump * jump;
      if (jump > threshold) ++r.jumps_above[j];
    }
    ++r.diff_count;
  }
  for (int j = 0; j < kJointCount; ++j) {
    r.rms_rate[j] = std::sqrt(sumsq[j] / r.diff_count) * rec.scenario.rate_hz;
    r.overall_max_jump = std::max(r.overall_max_jump, r.max_jump[j]);
  }
  return r;
}

/// Elementary statistics of |cuff force| per cuff and pooled.
struct TransparencyReport {
  std::array<double, 4> mean_abs{};
  std::array<double, 4> peak_abs{};
  std::array<double, 4> rms{};
  double pooled_mean = 0.0;
  double pooled_peak = 0.0;
  double pooled_rms = 0.0;
};

inline TransparencyReport transparency_metrics(const RunRecord& rec) {
  TransparencyReport r;
  std::array<double, 4> sum{}, sumsq{};
  const double n = static_cast<double>(rec.samples.size());
  for (const TrialSample& s : rec.samples) {
    for (int c = 0; c < 4; ++c) {
      const double a = std::abs(s.cuff[c]);
      sum[c] += a;
      sumsq[c] += a * a;
      r.peak_abs[c] = std::max(r.peak_abs[c], a);
    }
  }
  double total = 0.0, totalsq = 0.0;
  for (int c = 0; c < 4; ++c) {
    r.mean_abs[c] = n > 0 ? sum[c] / n : 0.0;
    r.rms[c] = n > 0 ? std::sqrt(sumsq[c] / n) : 0.0;
    total += sum[c];
    totalsq += sumsq[c];
    r.pooled_peak = std::max(r.pooled_peak, r.peak_abs[c]);
  }
  r.pooled_mean = n > 0 ? total / (4.0 * n) : 0.0;
  r.pooled_rms = n > 0 ? std::sqrt(totalsq / (4.0 * n)) : 0.0;
  return r;
}

/// Statistics of |ankle residual torque|: pooled over both ankles, over the
/// stance-side ankle only, and over per-gait-cycle stance-ankle peaks.
struct AnkleTorqueStats {
  double mean_abs = 0.0;
  double std_abs = 0.0;
  double max_abs = 0.0;
  double stance_mean_abs = 0.0;
  double stance_std_abs = 0.0;
  double stance_max_abs = 0.0;
  double cycle_peak_mean = 0.0;
  double cycle_peak_std = 0.0;
  long cycle_count = 0;
  long sample_count = 0;
};

namespace detail {

struct RunningStats {
  double sum = 0.0, sumsq = 0.0, peak = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    peak = std::max(peak, v);
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double stddev() const {
    if (!n) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sumsq / n - m * m));
  }
};

}  // namespace detail

inline AnkleTorqueStats ankle_stats(const std::vector<const RunRecord*>& records) {
  if (records.empty()) throw ValidationError("ankle_stats: needs at least one record");
  AnkleTorqueStats out;
  detail::RunningStats both, stance, peaks;
  for (const RunRecord* rec : records) {
    double cycle_peak = 0.0;
    bool in_cycle = false;
    double prev_phi = 0.0;
    for (size_t k = 0; k < rec->samples.size(); ++k) {
      const TrialSample& s = rec->samples[k];
      const double la = std::abs(s.residual[kLeftAnkle]);
      const double ra = std::abs(s.residual[kRightAnkle]);
      both.add(la);
      both.add(ra);
      const double st = s.support_left >= 0.5 ? la : ra;
      stance.add(st);
      if (k > 0 && s.phi < prev_phi) {  // phase wrapped: cycle boundary
        if (in_cycle) peaks.add(cycle_peak);
        cycle_peak = 0.0;
        in_cycle = true;
      }
      if (in_cycle) cycle_peak = std::max(cycle_peak, st);
      prev_phi = s.phi;
    }
    // The trailing partial cycle is dropped by design.
  }
  out.mean_abs = both.mean();
  out.std_abs = both.stddev();
  out.max_abs = both.peak;
  out.stance_mean_abs = stance.mean();
  out.stance_std_abs = stance.stddev();
  out.stance_max_abs = stance.peak;
  out.cycle_peak_mean = peaks.mean();
  out.cycle_peak_std = peaks.stddev();
  out.cycle_count = peaks.n;
  out.sample_count = stance.n;
  return out;
}

// ---------------------------------------------------------------------------
// Factor-wise comparison

struct FactorLabels {
  Strategy strategy = Strategy::Fsm;
  bool ankle_actuated = false;
  double load_kg = 0.0;

  bool operator==(const FactorLabels&) const = default;

  std::string tag() const {
    std::string s = strategy == Strategy::Blend ? "blend" : "fsm";
    s += ankle_actuated ? "_ankle-on" : "_ankle-off";
    s += "_load";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%g", load_kg);
    return s + buf;
  }
};

struct ComparisonRow {
  FactorLabels labels;
  long record_count = 0;
  double max_jump = 0.0;        // N·m, worst joint over the condition
  double rms_rate = 0.0;        // N·m/s, pooled over joints and records
  long jumps_above = 0;
  double cuff_mean = 0.0;       // N, pooled
  double cuff_peak = 0.0;
  double cuff_rms = 0.0;
  AnkleTorqueStats ankle;
  // metric -> value / baseline value; 1.0 when identical to baseline.
  std::map<std::string, double> ratios;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  FactorLabels baseline;
  bool baseline_found = false;
};

struct LabeledRecord {
  FactorLabels labels;
  const RunRecord* record = nullptr;
};

/// Groups records by factor combination, computes per-condition metrics and
/// ratios against the baseline condition (FSM, passive ankle, no load; the
/// first condition if that combination is absent).
inline ComparisonReport compare_runs(const std::vector<LabeledRecord>& entries,
                                     double jump_threshold = kDefaultJumpThreshold) {
  if (entries.empty()) throw ValidationError("compare_runs: no records");
  const double rate = entries.front().record->scenario.rate_hz;
  for (const auto& e : entries) {
    if (e.record->scenario.rate_hz != rate)
      throw ValidationError("compare_runs: records disagree on sample rate (" +
                            std::to_string(rate) + " vs " +
                            std::to_string(e.record->scenario.rate_hz) + ")");
  }

  // Stable grouping in first-seen order.
  std::vector<FactorLabels> order;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const auto& e : entries) {
    auto it = std::find(order.begin(), order.end(), e.labels);
    if (it == order.end()) {
      order.push_back(e.labels);
      groups.emplace_back();
      it = std::prev(order.end());
    }
    groups[static_cast<size_t>(it - order.begin())].push_back(e.record);
  }

  ComparisonReport rep;
  rep.baseline = FactorLabels{Strategy::Fsm, false, 0.0};
  size_t base_idx = 0;
  for (size_t i = 0; i < order.size(); ++i)
    if (order[i] == rep.baseline) {
      base_idx = i;
      rep.baseline_found = true;
      break;
    }
  if (!rep.baseline_found) rep.baseline = order[0];

  for (size_t i = 0; i < order.size(); ++i) {
    ComparisonRow row;
    row.labels = order[i];
    row.record_count = static_cast<long>(groups[i].size());
    double sumsq = 0.0;
    long diffs = 0;
    double cuff_sum = 0.0, cuff_sumsq = 0.0;
    long cuff_n = 0;
    for (const RunRecord* rec : groups[i]) {
      const SmoothnessReport sm = smoothness_metrics(*rec, jump_threshold);
      row.max_jump = std::max(row.max_jump, sm.overall_max_jump);
      for (int j = 0; j < kJointCount; ++j) {
        sumsq += (sm.rms_rate[j] / rate) * (sm.rms_rate[j] / rate) * sm.diff_count;
        row.jumps_above += sm.jumps_above[j];
      }
      diffs += sm.diff_count * kJointCount;
      const TransparencyReport tr = transparency_metrics(*rec);
      const double n = static_cast<double>(rec->samples.size());
      cuff_sum += tr.pooled_mean * 4.0 * n;
      cuff_sumsq += tr.pooled_rms * tr.pooled_rms * 4.0 * n;
      cuff_n += 4 * static_cast<long>(n);
      row.cuff_peak = std::max(row.cuff_peak, tr.pooled_peak);
    }
    row.rms_rate = diffs ? std::sqrt(sumsq / diffs) * rate : 0.0;
    row.cuff_mean = cuff_n ? cuff_sum / cuff_n : 0.0;
    row.cuff_rms = cuff_n ? std::sqrt(cuff_sumsq / cuff_n) : 0.0;
    row.ankle = ankle_stats(groups[i]);
    rep.rows.push_back(row);
  }

  const ComparisonRow& base = rep.rows[base_idx];
  auto ratio = [](double v, double b) { return v == b ? 1.0 : v / b; };
  for (ComparisonRow& row : rep.rows) {
    row.ratios["max_jump"] = ratio(row.max_jump, base.max_jump);
    row.ratios["rms_rate"] = ratio(row.rms_rate, base.rms_rate);
    row.ratios["cuff_mean"] = ratio(row.cuff_mean, base.cuff_mean);
    row.ratios["cuff_peak"] = ratio(row.cuff_peak, base.cuff_peak);
    row.ratios["ankle_mean_abs"] = ratio(row.ankle.mean_abs, base.ankle.mean_abs);
    row.ratios["ankle_max_abs"] = ratio(row.ankle.max_abs, base.ankle.max_abs);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Emitters

inline nlohmann::json comparison_to_json(const ComparisonReport& rep) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["baseline"] = rep.baseline.tag();
  j["baseline_found"] = rep.baseline_found;
  j["rows"] = nlohmann::json::array();
  for (const ComparisonRow& r : rep.rows) {
    nlohmann::json row;
    row["condition"] = r.labels.tag();
    row["strategy"] = strategy_name(r.labels.strategy);
    row["ankle_actuated"] = r.labels.ankle_actuated;
    row["load_kg"] = r.labels.load_kg;
    row["record_count"] = r.record_count;
    row["max_jump_nm"] = r.max_jump;
    row["rms_torque_rate_nm_s"] = r.rms_rate;
    row["jumps_above_threshold"] = r.jumps_above;
    row["cuff_mean_n"] = r.cuff_mean;
    row["cuff_peak_n"] = r.cuff_peak;
    row["cuff_rms_n"] = r.cuff_rms;
    row["ankle_mean_abs_nm"] = r.ankle.mean_abs;
    row["ankle_std_abs_nm"] = r.ankle.std_abs;
    row["ankle_max_abs_nm"] = r.ankle.max_abs;
    row["stance_ankle_mean_abs_nm"] = r.ankle.stance_mean_abs;
    row["stance_ankle_std_abs_nm"] = r.ankle.stance_std_abs;
    row["stance_ankle_max_abs_nm"] = r.ankle.stance_max_abs;
    row["cycle_peak_mean_nm"] = r.ankle.cycle_peak_mean;
    row["cycle_peak_std_nm"] = r.ankle.cycle_peak_std;
    row["cycle_count"] = r.ankle.cycle_count;
    row["ratios"] = r.ratios;
    j["rows"].push_back(row);
  }
  return j;
}

inline void write_comparison_csv(std::ostream& os, const ComparisonReport& rep) {
  os << "condition,strategy,ankle_actuated,load_kg,record_count,max_jump_nm,"
        "rms_torque_rate_nm_s,jumps_above_threshold,cuff_mean_n,cuff_peak_n,cuff_rms_n,"
        "ankle_mean_abs_nm,ankle_std_abs_nm,ankle_max_abs_nm,stance_ankle_mean_abs_nm,"
        "stance_ankle_std_abs_nm,stance_ankle_max_abs_nm,cycle_peak_mean_nm,cycle_peak_std_nm,"
        "cycle_count\n";
  for (const ComparisonRow& r : rep.rows) {
    os << r.labels.tag() << "," << strategy_name(r.labels.strategy) << ","
       << (r.labels.ankle_actuated ? 1 : 0) << ",";
    detail::write_g17(os, r.labels.load_kg);
    os << "," << r.record_count;
    for (double v : {r.max_jump, r.rms_rate}) {
      os << ",";
      detail::write_g17(os, v);
    }
    os << "," << r.jumps_above;
    for (double v : {r.cuff_mean, r.cuff_peak, r.cuff_rms, r.ankle.mean_abs, r.ankle.std_abs,
                     r.ankle.max_abs, r.ankle.stance_mean_abs, r.ankle.stance_std_abs,
                     r.ankle.stance_max_abs, r.ankle.cycle_peak_mean, r.ankle.cycle_peak_std}) {
      os << ",";
      detail::write_g17(os, v);
    }
    os << "," << r.ankle.cycle_count << "\n";
  }
}

/// Plot-ready long format: condition,metric,value.
inline void write_comparison_long_csv(std::ostream& os, const ComparisonReport& rep) {
  os << "condition,metric,value\n";
  auto put = [&os](const std::string& cond, const char* metric, double v) {
    os << cond << "," << metric << ",";
    detail::write_g17(os, v);
    os << "\n";
  };
  for (const ComparisonRow& r : rep.rows) {
    const std::string c = r.labels.tag();
    put(c, "max_jump_nm", r.max_jump);
    put(c, "rms_torque_rate_nm_s", r.rms_rate);
    put(c, "jumps_above_threshold", static_cast<double>(r.jumps_above));
    put(c, "cuff_mean_n", r.cuff_mean);
    put(c, "cuff_peak_n", r.cuff_peak);
    put(c, "cuff_rms_n", r.cuff_rms);
    put(c, "ankle_mean_abs_nm", r.ankle.mean_abs);
    put(c, "ankle_std_abs_nm", r.ankle.std_abs);
    put(c, "ankle_max_abs_nm", r.ankle.max_abs);
    put(c, "stance_ankle_mean_abs_nm", r.ankle.stance_mean_abs);
    put(c, "stance_ankle_max_abs_nm", r.ankle.stance_max_abs);
    put(c, "cycle_peak_mean_nm", r.ankle.cycle_peak_mean);
    put(c, "cycle_peak_std_nm", r.ankle.cycle_peak_std);
  }
}

/// Minimal SVG line chart of applied torque traces (one polyline per joint).
inline void write_torque_svg(std::ostream& os, const RunRecord& rec, int width = 900,
                             int height = 360) {
  static constexpr std::array<const char*, 6> colors = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                                        "#d62728", "#9467bd", "#8c564b"};
  double lo = 0.0, hi = 0.0;
  for (const TrialSample& s : rec.samples)
    for (int j = 0; j < kJointCount; ++j) {
      lo = std::min(lo, s.applied[j]);
      hi = std::max(hi, s.applied[j]);
    }
  if (hi == lo) hi = lo + 1.0;
  const double t_end = rec.samples.empty() ? 1.0 : rec.samples.back().t;
  auto x_of = [&](double t) { return 40.0 + (width - 50.0) * (t_end > 0 ? t / t_end : 0.0); };
  auto y_of = [&](double v) { return 10.0 + (height - 30.0) * (1.0 - (v - lo) / (hi - lo)); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int j = 0; j < kJointCount; ++j) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[j] << "\" stroke-width=\"1\" points=\"";
    for (const TrialSample& s : rec.samples)
      os << x_of(s.t) << "," << y_of(s.applied[j]) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << 45 + j * 70 << "\" y=\"" << height - 4 << "\" fill=\"" << colors[j]
       << "\" font-size=\"11\">" << kJointNames[j] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace exosim
