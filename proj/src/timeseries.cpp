#include "gridres/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "gridres/error.hpp"

namespace gridres {

namespace {

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    cells.push_back(trim(std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) throw InputError("not a number: '" + cell + "'");
  return value;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Fills missing entries by linear interpolation in sample index; edges take the nearest value.
void interpolate_missing(std::vector<std::optional<double>>& values, const std::string& column) {
  std::size_t n = values.size();
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i]) {
      prev = i;
      continue;
    }
    std::size_t next = i;
    while (next < n && !values[next]) ++next;
    if (!prev && next == n) throw InputError("column '" + column + "' has no values");
    for (std::size_t k = i; k < next; ++k) {
      if (!prev) {
        values[k] = *values[next];
      } else if (next == n) {
        values[k] = *values[*prev];
      } else {
        double w = double(k - *prev) / double(next - *prev);
        values[k] = (1.0 - w) * *values[*prev] + w * *values[next];
      }
    }
    i = next == n ? n : next - 1;
  }
}

}  // namespace

void ImbalanceSeries::validate() const {
  if (delta.empty()) throw InputError("series is empty");
  if (p_g.size() != delta.size()) throw InputError("delta and p_g lengths differ");
  if (!(step_h > 0.0) || !std::isfinite(step_h)) throw InputError("step_h must be positive");
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (!std::isfinite(delta[i])) throw InputError("non-finite imbalance at sample " + std::to_string(i));
    if (!std::isfinite(p_g[i]) || p_g[i] < 0.0)
      throw InputError("negative or non-finite P_g at sample " + std::to_string(i));
  }
}

double ImbalanceSeries::total_generation() const {
  double sum = 0.0;
  for (double p : p_g) sum += p;
  return sum;
}

double ImbalanceSeries::mean_generation() const { return total_generation() / double(size()); }

ImbalanceSeries ImbalanceSeries::make(std::vector<double> delta, std::vector<double> p_g, double step_h,
                                      std::optional<TimePoint> start) {
  ImbalanceSeries s;
  s.delta = std::move(delta);
  s.p_g = std::move(p_g);
  s.step_h = step_h;
  s.start_time = start;
  s.validate();
  return s;
}

ImbalanceSeries ImbalanceSeries::constant_generation(std::vector<double> delta, double p_g, double step_h) {
  std::vector<double> pg(delta.size(), p_g);
  return make(std::move(delta), std::move(pg), step_h);
}

TimePoint parse_timestamp(const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) throw InputError("empty timestamp");
  bool numeric = std::all_of(t.begin() + (t[0] == '-' ? 1 : 0), t.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (numeric) {
    long long secs = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), secs);
    if (ec != std::errc()) throw InputError("bad epoch timestamp: '" + t + "'");
    return TimePoint(std::chrono::seconds(secs));
  }
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  char sep = 0;
  int fields = std::sscanf(t.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &hh, &mm, &ss);
  if (fields < 3 || (fields > 3 && fields < 6) || (fields >= 4 && sep != ' ' && sep != 'T'))
    throw InputError("unrecognised timestamp: '" + t + "'");
  std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(unsigned(mo)), std::chrono::day(unsigned(d))};
  if (!ymd.ok() || hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60)
    throw InputError("invalid date/time: '" + t + "'");
  return std::chrono::sys_days(ymd) + std::chrono::hours(hh) + std::chrono::minutes(mm) + std::chrono::seconds(ss);
}

std::string format_timestamp(TimePoint t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  std::chrono::year_month_day ymd(day);
  std::chrono::hh_mm_ss hms(t - day);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()), int(hms.hours().count()), int(hms.minutes().count()),
                int(hms.seconds().count()));
  return buf;
}

ImbalanceSeries read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("missing header row");
  auto header = split_row(line);
  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return std::size_t(it - header.begin());
  };

  auto delta_col = find_col(schema.col_delta);
  if (!delta_col) throw InputError("missing column '" + schema.col_delta + "'");
  std::optional<std::size_t> pg_col;
  if (!schema.constant_pg) {
    pg_col = find_col(schema.col_pg);
    if (!pg_col) throw InputError("missing column '" + schema.col_pg + "' and no constant P_g given");
  }
  auto time_col = find_col(schema.col_time);
  if (!time_col && !schema.step_h)
    throw InputError("missing column '" + schema.col_time + "' and no explicit step_h given");

  std::vector<std::optional<double>> delta, pg;
  std::vector<TimePoint> times;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    auto cell = [&](std::size_t c) -> std::string { return c < cells.size() ? cells[c] : std::string(); };
    try {
      delta.push_back(parse_number(cell(*delta_col)));
      pg.push_back(schema.constant_pg ? std::optional<double>(*schema.constant_pg) : parse_number(cell(*pg_col)));
      if (time_col) times.push_back(parse_timestamp(cell(*time_col)));
    } catch (const InputError& e) {
      throw InputError("row " + std::to_string(row) + ": " + e.what());
    }
  }
  if (delta.empty()) throw InputError("no data rows");

  ImbalanceSeries series;
  std::size_t inserted = 0;
  if (time_col) {
    for (std::size_t i = 1; i < times.size(); ++i)
      if (times[i] <= times[i - 1]) throw InputError("non-monotone timestamps at data row " + std::to_string(i + 1));
    series.start_time = times.front();
  }

  if (time_col && times.size() > 1) {
    double base_s = schema.step_h ? *schema.step_h * 3600.0 : double((times[1] - times[0]).count());
    if (schema.fill_gaps) {
      if (!schema.step_h) {
        // The smallest spacing is the nominal step when gaps are present.
        for (std::size_t i = 1; i < times.size(); ++i) base_s = std::min(base_s, double((times[i] - times[i - 1]).count()));
      }
      std::vector<std::optional<double>> d2, p2;
      for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) {
          double ratio = double((times[i] - times[i - 1]).count()) / base_s;
          double k = std::round(ratio);
          if (std::abs(ratio - k) > 0.01 * k) throw InputError("irregular spacing: gap is not a whole number of steps");
          for (int m = 1; m < int(k); ++m) {
            d2.emplace_back();
            p2.emplace_back();
            ++inserted;
          }
        }
        d2.push_back(delta[i]);
        p2.push_back(pg[i]);
      }
      delta = std::move(d2);
      pg = std::move(p2);
    } else if (!schema.step_h) {
      for (std::size_t i = 1; i < times.size(); ++i) {
        double ds = double((times[i] - times[i - 1]).count());
        if (std::abs(ds - base_s) > 0.01 * base_s)
          throw InputError("irregular spacing at data row " + std::to_string(i + 1) + " (" + std::to_string(ds) +
                           " s vs " + std::to_string(base_s) + " s)");
      }
    }
    series.step_h = schema.step_h ? *schema.step_h : base_s / 3600.0;
  } else {
    if (!schema.step_h) throw InputError("cannot infer step_h from a single row; pass it explicitly");
    series.step_h = *schema.step_h;
  }

  std::size_t missing = 0;
  for (std::size_t i = 0; i < delta.size(); ++i) missing += (!delta[i]) + (!pg[i]);
  if (missing > 0) {
    if (!schema.fill_gaps) throw InputError("missing values in input (" + std::to_string(missing) + " cells)");
    interpolate_missing(delta, schema.col_delta);
    interpolate_missing(pg, schema.col_pg);
    series.provenance.push_back("linear interpolation filled " + std::to_string(missing) + " cells (" +
                                std::to_string(inserted) + " inserted rows)");
  }

  series.delta.reserve(delta.size());
  series.p_g.reserve(pg.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    series.delta.push_back(schema.negate_delta ? -*delta[i] : *delta[i]);
    series.p_g.push_back(*pg[i]);
  }
  if (schema.negate_delta) series.provenance.push_back("imbalance column negated");
  series.validate();
  return series;
}

ImbalanceSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  auto series = read_csv(in, schema);
  series.provenance.insert(series.provenance.begin(), "loaded from " + path.filename().string());
  return series;
}

void write_csv(std::ostream& out, const ImbalanceSeries& series) {
  series.validate();
  TimePoint origin = series.start_time.value_or(TimePoint{});
  auto step = std::chrono::seconds(std::llround(series.step_h * 3600.0));
  out << "time,delta,p_g\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_timestamp(origin + step * (long long)i) << ',' << format_double(series.delta[i]) << ','
        << format_double(series.p_g[i]) << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const ImbalanceSeries& series) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(out, series);
}

ImbalanceSeries resample(const ImbalanceSeries& series, double new_step_h) {
  series.validate();
  double ratio = new_step_h / series.step_h;
  double k_real = std::round(ratio);
  if (!(k_real >= 1.0) || std::abs(ratio - k_real) > 1e-9 * ratio)
    throw InputError("resample: new step is not an integer multiple of the current step");
  auto k = std::size_t(k_real);
  std::size_t bins = series.size() / k;
  if (bins == 0) throw InputError("resample: series shorter than one bin");

  ImbalanceSeries out;
  out.step_h = series.step_h * double(k);
  out.start_time = series.start_time;
  out.provenance = series.provenance;
  out.delta.resize(bins);
  out.p_g.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    double sd = 0.0, sp = 0.0;
    for (std::size_t j = b * k; j < (b + 1) * k; ++j) {
      sd += series.delta[j];
      sp += series.p_g[j];
    }
    out.delta[b] = sd / double(k);
    out.p_g[b] = sp / double(k);
  }
  if (k != 1) {
    out.provenance.push_back("resampled by " + std::to_string(k) + " (dropped " +
                             std::to_string(series.size() - bins * k) + " trailing samples)");
  }
  return out;
}

double GenerationProfile::at(double t_h) const {
  if (kind == Kind::Constant) return base_mw;
  return base_mw + amplitude_mw * std::sin(2.0 * std::numbers::pi * (t_h + phase_h) / period_h);
}

void SynthModel::validate() const {
  if (!(step_h > 0.0)) throw InputError("synth: step_h must be positive");
  if (volatility < 0.0 || !std::isfinite(volatility)) throw InputError("synth: volatility must be non-negative");
  if (reversion < 0.0) throw InputError("synth: reversion rate must be non-negative");
  double min_pg = generation.kind == GenerationProfile::Kind::Constant ? generation.base_mw
                                                                       : generation.base_mw - std::abs(generation.amplitude_mw);
  if (!(min_pg > 0.0)) throw InputError("synth: generation profile must stay positive");
  if (generation.kind == GenerationProfile::Kind::Sinusoidal && !(generation.period_h > 0.0))
    throw InputError("synth: period_h must be positive");
  if (events_per_day < 0.0 || event_fraction < 0.0) throw InputError("synth: event parameters must be non-negative");
}

SynthModel SynthModel::from_json(const nlohmann::json& j) {
  SynthModel m;
  m.step_h = j.value("step_h", m.step_h);
  m.reversion = j.value("reversion", m.reversion);
  m.volatility = j.value("volatility", m.volatility);
  m.mean_mw = j.contains("mean") ? j.at("mean").get<double>() : j.value("mean_mw", m.mean_mw);
  if (j.contains("generation")) {
    const auto& g = j.at("generation");
    if (g.is_number()) {
      m.generation.base_mw = g.get<double>();
    } else {
      auto kind = g.value("kind", std::string("constant"));
      if (kind == "constant") {
        m.generation.kind = GenerationProfile::Kind::Constant;
      } else if (kind == "sinusoidal") {
        m.generation.kind = GenerationProfile::Kind::Sinusoidal;
      } else {
        throw InputError("synth: unknown generation kind '" + kind + "'");
      }
      m.generation.base_mw = g.value("base_mw", m.generation.base_mw);
      m.generation.amplitude_mw = g.value("amplitude_mw", m.generation.amplitude_mw);
      m.generation.period_h = g.value("period_h", m.generation.period_h);
      m.generation.phase_h = g.value("phase_h", m.generation.phase_h);
    }
  }
  if (j.contains("spikes")) {
    for (const auto& s : j.at("spikes")) m.spikes.push_back({s.at("index").get<std::size_t>(), s.at("magnitude_mw").get<double>()});
  }
  m.events_per_day = j.value("events_per_day", m.events_per_day);
  m.event_fraction = j.value("event_fraction", m.event_fraction);
  m.event_samples = j.value("event_samples", m.event_samples);
  m.validate();
  return m;
}

ImbalanceSeries synth(std::size_t n, const SynthModel& model, std::uint64_t seed) {
  if (n == 0) throw InputError("synth: n must be at least 1");
  model.validate();

  ImbalanceSeries s;
  s.step_h = model.step_h;
  s.delta.resize(n);
  s.p_g.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.p_g[i] = model.generation.at(double(i) * model.step_h);

  // Exact OU transition over one step.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double decay = std::exp(-model.reversion * model.step_h);
  double sd = model.reversion > 0.0
                  ? model.volatility * std::sqrt((1.0 - decay * decay) / (2.0 * model.reversion))
                  : model.volatility * std::sqrt(model.step_h);
  double x = model.mean_mw;
  for (std::size_t i = 0; i < n; ++i) {
    double noise = normal(rng);
    if (i > 0) x = model.mean_mw + (x - model.mean_mw) * decay + sd * noise;
    s.delta[i] = x;
  }

  if (model.events_per_day > 0.0 && model.event_fraction > 0.0) {
    // Separate stream so enabling events leaves the OU path unchanged.
    std::mt19937_64 events(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double p = std::min(1.0, model.events_per_day * model.step_h / 24.0);
    for (std::size_t i = 0; i < n; ++i) {
      double u = unif(events);
      double sign = unif(events) < 0.5 ? -1.0 : 1.0;
      if (u < p) {
        for (std::size_t k = i; k < std::min(n, i + model.event_samples); ++k)
          s.delta[k] += sign * model.event_fraction * s.p_g[k];
      }
    }
  }

  for (const auto& spike : model.spikes) {
    if (spike.index >= n) throw InputError("synth: spike index beyond series length");
    s.delta[spike.index] += spike.magnitude_mw;
  }
  s.provenance.push_back("synthetic (seed " + std::to_string(seed) + ")");
  s.validate();
  return s;
}

}  // namespace gridres
