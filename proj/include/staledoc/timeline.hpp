#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "staledoc/docdiscovery.hpp"
#include "staledoc/revgraph.hpp"

namespace staledoc {

/// State of one (element, document) pair at one source revision:
/// `.` document absent, `-` document present without the reference,
/// otherwise the number of source instances.
class TimelineSymbol {
 public:
  enum class Kind : std::uint8_t { DocAbsent, NoReference, Count };

  static constexpr TimelineSymbol doc_absent() { return TimelineSymbol(Kind::DocAbsent, 0); }
  static constexpr TimelineSymbol no_reference() { return TimelineSymbol(Kind::NoReference, 0); }
  static constexpr TimelineSymbol count(std::uint64_t n) { return TimelineSymbol(Kind::Count, n); }

  constexpr Kind kind() const { return kind_; }
  constexpr std::uint64_t instances() const { return count_; }
  constexpr bool is_absent() const { return kind_ == Kind::DocAbsent; }
  constexpr bool is_no_reference() const { return kind_ == Kind::NoReference; }
  constexpr bool is_zero() const { return kind_ == Kind::Count && count_ == 0; }
  constexpr bool is_positive() const { return kind_ == Kind::Count && count_ > 0; }

  std::string to_string() const;
  static std::optional<TimelineSymbol> parse(std::string_view token);

  constexpr bool operator==(const TimelineSymbol&) const = default;

 private:
  constexpr TimelineSymbol(Kind kind, std::uint64_t n) : kind_(kind), count_(n) {}
  Kind kind_;
  std::uint64_t count_;
};

/// Space-separated rendering, e.g. "3 3 0 0 -".
std::string render_symbols(std::span<const TimelineSymbol> symbols);
/// Inverse of render_symbols; throws std::invalid_argument on bad tokens.
std::vector<TimelineSymbol> parse_symbols(std::string_view text);

struct ElementTimeline {
  std::string element;
  DocumentDescriptor document;
  /// Aligned with the source sequence; shorter only when partial.
  std::vector<TimelineSymbol> symbols;
  /// Set when counting failed at this ordinal; symbols stop before it.
  std::optional<std::size_t> failed_ordinal;

  bool partial() const { return failed_ordinal.has_value(); }
  bool operator==(const ElementTimeline&) const = default;
};

/// Whether `version` contains a reference to the element being tracked.
using ReferenceLookup = std::function<bool(const DocVersion& version)>;
/// Instance count at a revision; nullopt signals a counting failure.
using CountsProvider = std::function<std::optional<std::uint64_t>(const Revision& revision)>;

ElementTimeline build_timeline(std::string element, DocumentDescriptor document,
                               std::span<const LinkedRevision> links, std::span<const DocVersion> versions,
                               const ReferenceLookup& references, const CountsProvider& counts);

enum class FixKind { DocDelete, DocUpdate, SourceChange };
std::string_view to_string(FixKind kind);
std::optional<FixKind> parse_fix_kind(std::string_view text);

struct FixEvent {
  FixKind kind = FixKind::DocUpdate;
  std::size_t ordinal = 0;
  std::string sha;
  std::int64_t timestamp = 0;

  bool operator==(const FixEvent&) const = default;
};

struct OutdatedEpisode {
  std::string element;
  DocumentDescriptor document;
  /// First zero of the episode.
  std::size_t start_ordinal = 0;
  /// The symbol that ended the episode; unset while ongoing.
  std::optional<std::size_t> end_ordinal;
  std::optional<FixEvent> fix;
  std::string start_sha;
  std::int64_t start_timestamp = 0;
  /// Signed: reverts can put a fix before the deletion it repairs.
  std::int64_t duration_seconds = 0;

  bool ongoing() const { return !end_ordinal.has_value(); }
  bool operator==(const OutdatedEpisode&) const = default;
};

/// Literal: a zero opens an episode when a positive count appears anywhere
/// earlier. Strict: additionally the nearest earlier symbol with the
/// document present must be a positive count.
enum class EpisodeRule { Literal, Strict };

/// Episode boundaries only (start/end ordinals). Zero runs separated only by
/// absent-document symbols form one episode.
std::vector<OutdatedEpisode> detect_episodes(const ElementTimeline& timeline,
                                             EpisodeRule rule = EpisodeRule::Literal);

/// Maps the symbol that ended the episode: `.` doc delete, `-` doc update,
/// positive count source change. Throws std::logic_error for an ongoing
/// episode.
FixEvent classify_fix(const ElementTimeline& timeline, const OutdatedEpisode& episode,
                      const RevisionSequence& source);

/// Fix time minus start time; for an ongoing episode, scan time minus start.
std::int64_t episode_duration(const OutdatedEpisode& episode, const RevisionSequence& source,
                              std::int64_t scan_time);

/// detect_episodes plus fix classification, start metadata and duration.
std::vector<OutdatedEpisode> analyze_timeline(const ElementTimeline& timeline, const RevisionSequence& source,
                                              std::int64_t scan_time, EpisodeRule rule = EpisodeRule::Literal);

struct SurvivalPoint {
  std::int64_t duration = 0;
  double surviving = 0.0;

  bool operator==(const SurvivalPoint&) const = default;
};

/// Durations of fixed episodes with a strictly positive duration.
std::vector<std::int64_t> survival_durations(std::span<const OutdatedEpisode> episodes);

/// Fraction of durations strictly greater than each grid point. Empty input
/// yields an empty curve.
std::vector<SurvivalPoint> survival_curve(std::span<const std::int64_t> durations,
                                          std::span<const std::int64_t> grid);

/// 0, 1 day, 1 week, 1, 3 and 6 months, 1, 2, 5 and 10 years (seconds).
std::vector<std::int64_t> default_survival_grid();

}  // namespace staledoc
