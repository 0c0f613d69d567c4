#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "staledoc/docdiscovery.hpp"
#include "staledoc/matching.hpp"
#include "staledoc/revgraph.hpp"
#include "staledoc/timeline.hpp"

namespace staledoc {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMaxCsvRevisionColumns = 2000;

enum class ReportMode { Current, History };
std::string_view to_string(ReportMode mode);
std::optional<ReportMode> parse_report_mode(std::string_view text);

/// A commit in either repository: sha plus committer time.
struct CommitRef {
  std::string sha;
  std::int64_t timestamp = 0;

  bool operator==(const CommitRef&) const = default;
};

struct Evidence {
  std::string path;
  std::size_t line = 0;
  bool path_variant = false;
  std::string url;

  bool operator==(const Evidence&) const = default;
};

struct Finding {
  std::string element;
  DocumentDescriptor document;
  /// Commit of the document version the reference was read from.
  std::optional<CommitRef> document_commit;
  std::string document_url;

  // Current mode.
  std::optional<CurrentStatus> status;
  std::optional<CommitRef> snapshot;
  std::uint64_t snapshot_count = 0;
  std::optional<CommitRef> current;
  std::uint64_t current_count = 0;
  /// First revision after the last one still containing an instance.
  std::optional<CommitRef> deletion;
  std::vector<Evidence> evidence;

  // History mode.
  std::optional<std::string> timeline;
  std::vector<OutdatedEpisode> episodes;

  /// Current mode: status Outdated. History mode: at least one episode.
  bool outdated() const;
  /// Outdated at the source head: status Outdated or an ongoing episode.
  bool currently_outdated() const;
  bool operator==(const Finding&) const = default;
};

struct DurationStats {
  std::size_t count = 0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  double mean = 0.0;
  double median = 0.0;

  bool operator==(const DurationStats&) const = default;
};

std::optional<DurationStats> duration_stats(std::span<const std::int64_t> durations);

struct Aggregates {
  std::uint64_t elements_total = 0;
  std::uint64_t elements_outdated = 0;
  std::uint64_t documents_total = 0;
  std::uint64_t documents_outdated = 0;
  std::uint64_t projects_total = 0;
  std::uint64_t projects_outdated = 0;
  bool project_outdated = false;

  std::uint64_t episodes_total = 0;
  std::uint64_t episodes_ongoing = 0;
  std::uint64_t fix_doc_delete = 0;
  std::uint64_t fix_doc_update = 0;
  std::uint64_t fix_source_change = 0;
  std::uint64_t reoutdated_count = 0;
  std::uint64_t negative_durations = 0;

  /// Fixed episodes with a positive duration.
  std::optional<DurationStats> fixed_durations;
  /// Time references have been outdated as of the scan.
  std::optional<DurationStats> outdated_durations;
  std::vector<SurvivalPoint> survival;

  double element_rate() const;
  double document_rate() const;
  double project_rate() const;

  bool operator==(const Aggregates&) const = default;
};

struct ScanReport {
  std::string project;
  std::int64_t scan_time = 0;
  ReportMode mode = ReportMode::Current;
  bool partial = false;
  std::optional<CommitRef> source_head;
  std::optional<CommitRef> wiki_head;
  /// History mode: the analyzed window of the source sequence. Ordinals are
  /// positions in the full sequence.
  std::vector<Revision> revisions;
  std::size_t revisions_total = 0;
  std::vector<Finding> findings;
  /// History mode: every (element, document) pair, including those without
  /// episodes.
  std::vector<ElementTimeline> timelines;
  std::vector<ScanWarning> warnings;
  Aggregates aggregates;

  bool operator==(const ScanReport&) const = default;
};

/// Findings sorted by (document, element).
void sort_findings(std::vector<Finding>& findings);

/// Aggregates for one report. Element and document totals are inputs; all
/// other fields derive from the findings.
Aggregates compute_aggregates(std::span<const Finding> findings, std::uint64_t elements_total,
                              std::uint64_t documents_total, std::int64_t scan_time);

/// Pooled aggregates over reports from distinct projects.
Aggregates aggregate_corpus(std::span<const ScanReport> reports);

enum class OutputFormat { Json, Csv, Markdown };
std::optional<OutputFormat> parse_output_format(std::string_view text);

std::string render_findings(const ScanReport& report, OutputFormat format);

class ReportFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses render_findings(Json) output. Throws ReportFormatError on
/// malformed input or a schema version other than kSchemaVersion.
ScanReport parse_report_json(std::string_view text);

enum class TableFormat { Text, Csv };

class TableTooWide : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// One row per timeline, one column per revision of `revisions` in
/// [first, last). Throws std::logic_error when a timeline is not aligned
/// with `revisions`, TableTooWide for CSV beyond kMaxCsvRevisionColumns.
std::string render_history_table(std::span<const ElementTimeline> timelines, std::span<const Revision> revisions,
                                 TableFormat format, std::size_t first = 0,
                                 std::optional<std::size_t> last = std::nullopt);

/// Markdown text for a tracker issue. Throws std::invalid_argument when the
/// report holds no outdated finding.
std::string render_issue_draft(const ScanReport& report);

/// Aggregates as JSON (stats output).
std::string render_aggregates_json(const Aggregates& aggregates);
std::string render_aggregates_markdown(const Aggregates& aggregates);

std::string format_rfc3339(std::int64_t epoch_seconds);
/// Accepts `Z` or a numeric offset; fractional seconds are truncated.
std::optional<std::int64_t> parse_rfc3339(std::string_view text);

struct UrlTemplates {
  std::string base;
  std::string blob = "{base}/blob/{sha}/{path}#L{line}";
  std::string wiki = "{base}/wiki/{page}/{sha}";

  bool enabled() const { return !base.empty(); }
  /// Line 0 drops the `#L{line}` anchor.
  std::string source_url(std::string_view sha, std::string_view path, std::size_t line) const;
  std::string document_url(const DocumentDescriptor& document, std::string_view sha) const;
};

/// https://github.com/o/r for GitHub remotes in https, ssh or scp form.
std::optional<std::string> github_base_from_remote(std::string_view remote_url);

}  // namespace staledoc
