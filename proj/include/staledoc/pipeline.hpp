#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "staledoc/docdiscovery.hpp"
#include "staledoc/extraction.hpp"
#include "staledoc/matching.hpp"
#include "staledoc/reporting.hpp"
#include "staledoc/timeline.hpp"

namespace staledoc {

struct PipelineConfig {
  std::filesystem::path source;
  std::optional<std::filesystem::path> wiki;
  std::optional<std::string> branch;
  std::string project;
  DiscoveryConfig discovery;
  /// Defaults to the built-in catalog.
  std::shared_ptr<const RegexCatalog> catalog;
  MatchConfig match;
  unsigned jobs = 1;
  std::int64_t scan_time = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  UrlTemplates urls;
  EpisodeRule episode_rule = EpisodeRule::Literal;
};

struct PipelineResult {
  ScanReport report;
  bool timed_out = false;
};

/// Current-state check of every reference in the current documentation.
PipelineResult run_scan(const PipelineConfig& config);

/// Symbolic timelines over the whole first-parent history. Revisions are
/// counted newest first; on timeout the report covers the completed suffix
/// of the sequence and is marked partial.
PipelineResult run_history(const PipelineConfig& config);

}  // namespace staledoc
