#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "staledoc/glob.hpp"
#include "staledoc/revgraph.hpp"

namespace staledoc {

struct MatchedPath {
  std::string path;
  /// 1-based line of the first match; 0 for a file-path variant.
  std::size_t line = 0;
  bool path_variant = false;

  bool operator==(const MatchedPath&) const = default;
};

struct InstanceCount {
  std::string element;
  Revision revision;
  std::uint64_t count = 0;
  std::vector<MatchedPath> matched_paths;
};

enum class BinaryDetection { NullByteHeuristic };

struct MatchConfig {
  /// Gitignore-style; documents under analysis are excluded separately.
  std::vector<std::string> exclude_globs{".git/"};
  std::uint64_t max_file_bytes = 10ull * 1024 * 1024;
  BinaryDetection binary_detection = BinaryDetection::NullByteHeuristic;
  std::uint64_t per_file_cap = 10'000;
  std::size_t matched_paths_limit = 10;

  void validate() const;
};

/// Structured warning emitted while scanning (skipped or capped files,
/// missing wiki, partial timelines).
struct ScanWarning {
  std::string kind;
  std::string path;
  std::string object;
  std::string message;

  auto operator<=>(const ScanWarning&) const = default;
};

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

struct WordCount {
  std::uint64_t count = 0;
  std::size_t first_line = 0;
  bool capped = false;
};

/// Counts case-sensitive exact occurrences of `element` that are whole words:
/// a word-character edge of the element must not touch a word character in
/// the text; non-word edges carry no constraint. Matches do not overlap.
WordCount count_whole_word(std::string_view text, std::string_view element,
                           std::uint64_t cap = std::numeric_limits<std::uint64_t>::max());

/// A null byte within the first 8 KiB.
bool looks_binary(std::string_view content);

/// Every suffix of path components of each path, with and without a leading
/// slash.
std::set<std::string> expand_path_variants(std::span<const std::string> listing);

/// True when `element` is one of the path variants of `path`.
bool is_path_variant(std::string_view element, std::string_view path);

enum class CurrentStatus { Outdated, InSync, NeverMatched };
std::string_view to_string(CurrentStatus status);
std::optional<CurrentStatus> parse_current_status(std::string_view text);

/// Throws std::logic_error when the counts are for different elements.
CurrentStatus classify_current(const InstanceCount& snapshot, const InstanceCount& current);

/// Per-blob scan results shared across revisions and workers. Blobs are
/// immutable, so entries never go stale. Hit indices refer to the element
/// list of the counters using the cache, which must therefore all share one
/// element list.
class BlobScanCache {
 public:
  enum class Status { Scanned, Binary, Oversize, Unreadable };
  struct Hit {
    std::uint32_t element = 0;
    std::uint64_t count = 0;
    std::size_t first_line = 0;
  };
  struct Entry {
    Status status = Status::Scanned;
    std::vector<Hit> hits;
  };

  std::shared_ptr<const Entry> find(const std::string& blob) const;
  void insert(const std::string& blob, std::shared_ptr<const Entry> entry);

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Entry>> entries_;
};

/// Counts a fixed set of elements at arbitrary revisions. A counter may be
/// used from several threads at once provided each passes its own
/// repository handle.
class InstanceCounter {
 public:
  InstanceCounter(std::vector<std::string> elements, MatchConfig config,
                  std::shared_ptr<BlobScanCache> cache = nullptr);

  const std::vector<std::string>& elements() const { return elements_; }

  /// One InstanceCount per element, in element order. `extra_excluded` are
  /// exact paths skipped for content scanning (the documents themselves).
  std::vector<InstanceCount> count_revision(GitRepository& repo, const Revision& revision,
                                            const std::unordered_set<std::string>& extra_excluded = {});
  /// Same, over a listing already obtained from `repo.tree_at(revision)`.
  std::vector<InstanceCount> count_tree(GitRepository& repo, const Revision& revision,
                                        std::span<const TreeEntry> tree,
                                        const std::unordered_set<std::string>& extra_excluded = {});

  std::vector<ScanWarning> warnings() const;

 private:
  std::shared_ptr<const BlobScanCache::Entry> scan_blob(GitRepository& repo, const TreeEntry& entry);
  void warn(ScanWarning w);

  std::vector<std::string> elements_;
  MatchConfig config_;
  PathFilter excludes_;
  std::shared_ptr<BlobScanCache> cache_;
  mutable std::mutex warnings_mutex_;
  std::set<ScanWarning> warnings_;
};

/// Single-element convenience over InstanceCounter.
InstanceCount count_instances(GitRepository& repo, std::string_view element, const Revision& revision,
                              const MatchConfig& config = {},
                              const std::unordered_set<std::string>& extra_excluded = {});

}  // namespace staledoc
