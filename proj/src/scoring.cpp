#include "jlese/scoring.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "jlese/errors.hpp"

namespace jlese::scoring {

namespace {

constexpr double kWeightSumTol = 1e-9;
constexpr double kZClip = 3.0;
constexpr double kNeutral = 0.5;

std::size_t index_of(Pillar p) { return static_cast<std::size_t>(p); }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_double(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

template <typename Enum>
Enum parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, Enum>> table,
                const std::string& field) {
  for (const auto& [name, value] : table) {
    if (text == name) return value;
  }
  throw ConfigError("unknown " + field + " '" + text + "'");
}

double flip(double x, Direction d) { return d == Direction::kLowerBetter ? 1.0 - x : x; }

}  // namespace

std::string to_string(Pillar p) {
  switch (p) {
    case Pillar::kEnvironmental: return "ENVIRONMENTAL";
    case Pillar::kSocial: return "SOCIAL";
    case Pillar::kEconomic: return "ECONOMIC";
  }
  return "?";
}

void ScoringScheme::validate() const {
  if (schema.empty()) throw ConfigError("scoring schema lists no metrics");
  std::set<std::string> seen;
  std::size_t overrides = 0;
  double override_sum = 0.0;
  for (const auto& m : schema) {
    if (m.id.empty()) throw ConfigError("metric with empty id");
    if (!seen.insert(m.id).second) throw ConfigError("duplicate metric id '" + m.id + "'");
    if (m.weight) {
      if (!(std::isfinite(*m.weight) && *m.weight >= 0.0)) {
        throw ConfigError("weight for '" + m.id + "' must be finite and >= 0");
      }
      ++overrides;
      override_sum += *m.weight;
    }
    if (m.pinned_min.has_value() != m.pinned_max.has_value()) {
      throw ConfigError("metric '" + m.id + "' pins only one of min/max");
    }
    if (m.pinned_min) {
      if (normalization != Normalization::kMinMax) {
        throw ConfigError("pinned bounds on '" + m.id + "' require MIN_MAX normalization");
      }
      if (!(*m.pinned_min < *m.pinned_max)) {
        throw ConfigError("metric '" + m.id + "' needs min < max");
      }
    }
  }
  if (overrides != 0 && overrides != schema.size()) {
    throw ConfigError("weight overrides must be given for every metric or none");
  }
  if (overrides != 0 && std::abs(override_sum - 1.0) > kWeightSumTol) {
    throw ConfigError("weight overrides sum to " + std::to_string(override_sum) + ", not 1");
  }
}

std::vector<double> normalize(std::span<const double> values, const MetricDef& def,
                              Normalization method) {
  if (values.empty()) throw DataError("metric '" + def.id + "': empty cohort");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError("metric '" + def.id + "': non-finite value at cohort index " +
                      std::to_string(i));
    }
  }

  std::vector<double> out(values.size(), kNeutral);
  if (method == Normalization::kMinMax) {
    double lo = 0.0, hi = 0.0;
    if (def.pinned_min) {
      lo = *def.pinned_min;
      hi = *def.pinned_max;
    } else {
      const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
      lo = *mn;
      hi = *mx;
    }
    if (hi == lo) return out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = flip(std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0), def.direction);
    }
    return out;
  }

  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (sd == 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double z = std::clamp((values[i] - mean) / sd, -kZClip, kZClip);
    out[i] = flip((z + kZClip) / (2.0 * kZClip), def.direction);
  }
  return out;
}

std::vector<double> metric_weights(const ScoringScheme& scheme) {
  scheme.validate();
  std::vector<double> w(scheme.schema.size());
  if (scheme.schema.front().weight) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = *scheme.schema[i].weight;
    return w;
  }
  // Count-based: every metric carries (count/total)/count = 1/total.
  std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
  return w;
}

PillarWeights category_weights(const ScoringScheme& scheme) {
  const auto w = metric_weights(scheme);
  PillarWeights out{};
  for (std::size_t i = 0; i < w.size(); ++i) out[index_of(scheme.schema[i].pillar)] += w[i];
  if (!scheme.schema.front().weight) {
    // Exact ratio rather than a sum of 1/total terms.
    std::array<std::size_t, kPillarCount> counts{};
    for (const auto& m : scheme.schema) ++counts[index_of(m.pillar)];
    for (std::size_t p = 0; p < kPillarCount; ++p) {
      out[p] = static_cast<double>(counts[p]) / static_cast<double>(scheme.schema.size());
    }
  }
  return out;
}

std::vector<FarmerScore> composite_score(std::span<const MetricRecord> records,
                                         const ScoringScheme& scheme) {
  scheme.validate();
  if (records.empty()) throw ConfigError("no metric records to score");

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < scheme.schema.size(); ++j) column[scheme.schema[j].id] = j;

  const auto where = [](const MetricRecord& r) {
    return r.line ? " (line " + std::to_string(r.line) + ")" : std::string();
  };

  // farmer -> per-metric value; std::map fixes the output order.
  std::map<std::string, std::vector<std::optional<double>>> table;
  for (const auto& r : records) {
    const auto it = column.find(r.metric_id);
    if (it == column.end()) {
      throw DataError("unknown metric '" + r.metric_id + "' for farmer '" + r.farmer_id + "'" +
                      where(r));
    }
    const auto& def = scheme.schema[it->second];
    if (!std::isfinite(r.value)) {
      throw DataError("non-finite value for farmer '" + r.farmer_id + "', metric '" +
                      r.metric_id + "'" + where(r));
    }
    if (def.kind == MetricKind::kBinary && r.value != 0.0 && r.value != 1.0) {
      throw DataError("binary metric '" + r.metric_id + "' must be 0 or 1 for farmer '" +
                      r.farmer_id + "'" + where(r));
    }
    auto& row = table[r.farmer_id];
    row.resize(scheme.schema.size());
    if (row[it->second]) {
      throw DataError("duplicate record for farmer '" + r.farmer_id + "', metric '" +
                      r.metric_id + "'" + where(r));
    }
    row[it->second] = r.value;
  }

  std::vector<std::string> gaps;
  for (const auto& [farmer, row] : table) {
    for (std::size_t j = 0; j < scheme.schema.size(); ++j) {
      if (!row[j]) gaps.push_back(farmer + ":" + scheme.schema[j].id);
    }
  }
  if (!gaps.empty()) {
    std::string msg = "missing metric values (farmer:metric):";
    for (const auto& g : gaps) msg += " " + g;
    throw DataError(msg);
  }

  const auto weights = metric_weights(scheme);
  std::vector<FarmerScore> out;
  out.reserve(table.size());
  for (const auto& [farmer, row] : table) out.push_back({farmer, 0.0});

  std::vector<double> cohort(table.size());
  for (std::size_t j = 0; j < scheme.schema.size(); ++j) {
    std::size_t i = 0;
    for (const auto& [farmer, row] : table) cohort[i++] = *row[j];
    const auto norm = normalize(cohort, scheme.schema[j], scheme.normalization);
    for (std::size_t f = 0; f < out.size(); ++f) out[f].score += weights[j] * norm[f];
  }
  for (auto& s : out) s.score = std::clamp(100.0 * s.score, 0.0, 100.0);
  return out;
}

std::vector<MetricRecord> read_metrics_csv(std::istream& in, const std::string& source) {
  std::vector<MetricRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto ctx = source + ":" + std::to_string(lineno);

    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (text.back() == ',') fields.emplace_back();

    if (!have_header) {
      if (fields != std::vector<std::string>{"farmer_id", "metric_id", "value"}) {
        throw DataError(ctx + ": expected header farmer_id,metric_id,value");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DataError(ctx + ": expected 3 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw DataError(ctx + ": empty farmer_id or metric_id");
    }
    const auto v = parse_double(fields[2]);
    if (!v) throw DataError(ctx + ": cannot parse value '" + fields[2] + "'");
    out.push_back({fields[0], fields[1], *v, lineno});
  }
  if (!have_header) throw ConfigError(source + ": metrics file is empty");
  return out;
}

ScoringScheme parse_scheme(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("schema is not valid YAML: ") + ex.what());
  }
  if (!root.IsMap()) throw ConfigError("schema must be a mapping");

  ScoringScheme scheme;
  try {
    if (root["normalization"]) {
      scheme.normalization = parse_enum<Normalization>(
          root["normalization"].as<std::string>(),
          {{"MIN_MAX", Normalization::kMinMax}, {"Z_SCORE_CLIPPED", Normalization::kZScoreClipped}},
          "normalization");
    }
    if (root["category_weighting"] &&
        root["category_weighting"].as<std::string>() != "COUNT_BASED") {
      throw ConfigError("only COUNT_BASED category weighting is supported");
    }
    const auto metrics = root["metrics"];
    if (!metrics || !metrics.IsSequence()) throw ConfigError("schema needs a 'metrics' list");
    for (const auto& node : metrics) {
      MetricDef def;
      if (!node["id"]) throw ConfigError("metric entry without id");
      def.id = node["id"].as<std::string>();
      def.pillar = parse_enum<Pillar>(node["pillar"].as<std::string>(""),
                                      {{"ENVIRONMENTAL", Pillar::kEnvironmental},
                                       {"SOCIAL", Pillar::kSocial},
                                       {"ECONOMIC", Pillar::kEconomic}},
                                      "pillar for '" + def.id + "'");
      def.direction = parse_enum<Direction>(
          node["direction"].as<std::string>("HIGHER_BETTER"),
          {{"HIGHER_BETTER", Direction::kHigherBetter}, {"LOWER_BETTER", Direction::kLowerBetter}},
          "direction for '" + def.id + "'");
      def.kind = parse_enum<MetricKind>(
          node["kind"].as<std::string>("CONTINUOUS"),
          {{"CONTINUOUS", MetricKind::kContinuous}, {"BINARY", MetricKind::kBinary}},
          "kind for '" + def.id + "'");
      if (node["weight"]) def.weight = node["weight"].as<double>();
      if (node["min"]) def.pinned_min = node["min"].as<double>();
      if (node["max"]) def.pinned_max = node["max"].as<double>();
      scheme.schema.push_back(std::move(def));
    }
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("malformed schema entry: ") + ex.what());
  }
  scheme.validate();
  return scheme;
}

ScoringScheme load_scheme(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scheme(buf.str());
}

void write_scores_csv(std::ostream& out, std::span<const FarmerScore> scores) {
  out << "farmer_id,score\n";
  char buf[64];
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof buf, "%.4f", s.score);
    out << s.farmer_id << ',' << buf << '\n';
  }
}

}  // namespace jlese::scoring
