#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridres {

using TimePoint = std::chrono::sys_seconds;

/// Net imbalance samples Δ_i (MW, signed) with the scheduled generation P_g(i) (MW).
///
/// Sign convention: the residual after storage is Δ_i + s_i, so a positive Δ is
/// offset by discharging (negative s). Sources using the opposite sign should be
/// negated at ingestion (CsvSchema::negate_delta).
struct ImbalanceSeries {
  std::vector<double> delta;
  std::vector<double> p_g;
  double step_h = 1.0;
  std::optional<TimePoint> start_time;
  /// Free-form notes about how the data was produced (gap filling, resampling, synthesis).
  std::vector<std::string> provenance;

  std::size_t size() const noexcept { return delta.size(); }

  /// Throws InputError unless the series satisfies every invariant.
  void validate() const;

  double total_generation() const;
  double mean_generation() const;

  static ImbalanceSeries make(std::vector<double> delta, std::vector<double> p_g, double step_h,
                              std::optional<TimePoint> start = std::nullopt);
  static ImbalanceSeries constant_generation(std::vector<double> delta, double p_g, double step_h);
};

/// Column mapping for CSV ingestion.
struct CsvSchema {
  std::string col_time = "time";
  std::string col_delta = "delta";
  std::string col_pg = "p_g";
  /// Used instead of a generation column when set.
  std::optional<double> constant_pg;
  /// Skips timestamp inference when set.
  std::optional<double> step_h;
  bool negate_delta = false;
  /// Linearly interpolate whole missing steps and empty cells instead of failing.
  bool fill_gaps = false;
};

ImbalanceSeries read_csv(std::istream& in, const CsvSchema& schema);
ImbalanceSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Writes time,delta,p_g with 17 significant digits.
void write_csv(std::ostream& out, const ImbalanceSeries& series);
void write_csv(const std::filesystem::path& path, const ImbalanceSeries& series);

/// Bin-averages to a coarser step. new_step_h must be an integer multiple of step_h;
/// a trailing partial bin is dropped.
ImbalanceSeries resample(const ImbalanceSeries& series, double new_step_h);

/// Parses "YYYY-MM-DD HH:MM[:SS]" (optionally with 'T' and trailing 'Z') or integer epoch seconds.
TimePoint parse_timestamp(const std::string& text);
std::string format_timestamp(TimePoint t);

struct GenerationProfile {
  enum class Kind { Constant, Sinusoidal };
  Kind kind = Kind::Constant;
  double base_mw = 10000.0;
  double amplitude_mw = 0.0;
  double period_h = 24.0;
  double phase_h = 0.0;

  double at(double t_h) const;
};

struct Spike {
  std::size_t index = 0;
  double magnitude_mw = 0.0;
};

/// Mean-reverting (Ornstein-Uhlenbeck) imbalance with an optional generation profile,
/// deterministic spikes and randomly placed rectangular events.
struct SynthModel {
  double step_h = 1.0 / 12.0;
  /// Reversion rate κ, 1/h.
  double reversion = 2.0;
  /// σ, MW per sqrt(h).
  double volatility = 100.0;
  double mean_mw = 0.0;
  GenerationProfile generation;
  std::vector<Spike> spikes;
  /// Poisson rate of random events; each adds ±event_fraction·P_g for event_samples samples.
  double events_per_day = 0.0;
  double event_fraction = 0.0;
  std::size_t event_samples = 1;

  void validate() const;
  static SynthModel from_json(const nlohmann::json& j);
};

ImbalanceSeries synth(std::size_t n, const SynthModel& model, std::uint64_t seed);

}  // namespace gridres
