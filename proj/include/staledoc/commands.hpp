#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace staledoc::cli {

enum ExitCode : int {
  kExitClean = 0,
  kExitOutdated = 1,
  kExitError = 2,
  kExitTimeout = 3,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<std::string> repo;
  std::optional<std::string> url;
  /// A path, `auto` (sibling `<repo>.wiki` when present) or `none`.
  std::string wiki = "auto";
  std::optional<std::string> branch;
  std::optional<std::string> regex_file;
  std::vector<std::string> exclude;
  std::vector<std::string> doc_globs;
  /// json, csv, md or issue.
  std::string format = "json";
  std::optional<std::string> out;
  double timeout_seconds = 86'400;
  std::uint64_t max_file_bytes = 10ull * 1024 * 1024;
  unsigned jobs = 1;
  /// RFC 3339 or integer seconds since the epoch; defaults to now.
  std::optional<std::string> scan_time;
  std::optional<std::string> url_base;
  std::optional<std::string> project;
  /// History mode: emit the per-revision table instead of findings.
  bool table = false;
  /// History table column range, `first:last` as 1-based revision numbers.
  std::optional<std::string> columns;
  bool strict_episodes = false;

  /// Throws UsageError.
  void validate() const;
};

int cmd_fetch(const std::string& url, bool with_wiki, const std::filesystem::path& dest, std::ostream& out,
              std::ostream& err);
int cmd_scan(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_history(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_stats(const std::vector<std::string>& files, const std::string& format, const std::optional<std::string>& out_path,
              std::ostream& out, std::ostream& err);
int cmd_dump_catalog(std::ostream& out);

/// Parses arguments (flags over `STALEDOC_*` environment variables over the
/// `--config` file) and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace staledoc::cli
