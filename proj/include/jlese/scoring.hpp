#pragma once

// Composite individual-ESE score: normalize each metric across the cohort,
// weight categories by how many metrics they hold, and sum to [0, 100].

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jlese::scoring {

enum class Pillar { kEnvironmental, kSocial, kEconomic };
enum class Direction { kHigherBetter, kLowerBetter };
enum class MetricKind { kContinuous, kBinary };
enum class Normalization { kMinMax, kZScoreClipped };

inline constexpr std::size_t kPillarCount = 3;

struct MetricDef {
  std::string id;
  Pillar pillar = Pillar::kEconomic;
  Direction direction = Direction::kHigherBetter;
  MetricKind kind = MetricKind::kContinuous;
  std::optional<double> weight;     // expert override
  std::optional<double> pinned_min; // reference-population bounds (min-max only)
  std::optional<double> pinned_max;
};

struct MetricRecord {
  std::string farmer_id;
  std::string metric_id;
  double value = 0.0;
  std::size_t line = 0;  // source line, 0 when not read from a file
};

struct ScoringScheme {
  std::vector<MetricDef> schema;
  Normalization normalization = Normalization::kMinMax;

  /// Throws ConfigError on an empty schema, duplicate ids, partial or
  /// mis-summed weight overrides, or pinned bounds used with z-scores.
  void validate() const;
};

struct FarmerScore {
  std::string farmer_id;
  double score = 0.0;
};

using PillarWeights = std::array<double, kPillarCount>;

std::string to_string(Pillar p);

/// Maps one metric's cohort values into [0, 1], best = 1. A cohort with no
/// spread maps to 0.5. Throws DataError naming the offending index on
/// non-finite input.
std::vector<double> normalize(std::span<const double> values, const MetricDef& def,
                              Normalization method = Normalization::kMinMax);

/// weight(pillar) = metrics in pillar / total metrics (or the sum of the
/// overrides when present).
PillarWeights category_weights(const ScoringScheme& scheme);

/// Effective per-metric weights in schema order; they sum to 1.
std::vector<double> metric_weights(const ScoringScheme& scheme);

/// One score per farmer, sorted by farmer id. Every farmer needs a value for
/// every metric; gaps are reported together in one DataError.
std::vector<FarmerScore> composite_score(std::span<const MetricRecord> records,
                                         const ScoringScheme& scheme);

/// Reads `farmer_id,metric_id,value` CSV. Throws DataError with line context.
std::vector<MetricRecord> read_metrics_csv(std::istream& in, const std::string& source);

/// Reads a YAML schema:
///   normalization: MIN_MAX | Z_SCORE_CLIPPED
///   metrics:
///     - {id: x, pillar: ENVIRONMENTAL, direction: HIGHER_BETTER, kind: CONTINUOUS}
/// with optional per-metric `weight`, `min`, `max`.
ScoringScheme load_scheme(const std::string& path);
ScoringScheme parse_scheme(const std::string& yaml_text);

/// Writes `farmer_id,score` with four decimals.
void write_scores_csv(std::ostream& out, std::span<const FarmerScore> scores);

}  // namespace jlese::scoring
