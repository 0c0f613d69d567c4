#pragma once

#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace staledoc {

class GlobError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A single gitignore-style pattern matched against repo-relative paths.
///
/// - `*` and `?` never cross a `/`; `**` does.
/// - A pattern without an inner `/` matches at any depth; otherwise it is
///   anchored at the repository root (a leading `/` is dropped).
/// - A trailing `/` restricts the pattern to directories, i.e. to paths
///   that have a matching parent.
/// - Matching a directory matches every path beneath it.
class GlobPattern {
 public:
  explicit GlobPattern(std::string_view pattern, bool case_insensitive = false);

  bool matches(std::string_view path) const;
  const std::string& source() const { return source_; }
  bool negated() const { return negated_; }

 private:
  std::string source_;
  bool negated_ = false;
  std::regex regex_;
};

/// Ordered gitignore-style list: the last matching pattern wins, and `!pat`
/// re-includes.
class PathFilter {
 public:
  PathFilter() = default;
  explicit PathFilter(const std::vector<std::string>& patterns);

  void add(std::string_view pattern);
  bool excluded(std::string_view path) const;
  bool empty() const { return patterns_.empty(); }

 private:
  std::vector<GlobPattern> patterns_;
};

}  // namespace staledoc
