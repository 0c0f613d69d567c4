#pragma once

#include <compare>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace staledoc {

/// Where a document lives: the source repository (README and any extra
/// documentation globs) or the separate wiki repository.
enum class DocOrigin { Readme, Wiki };

enum class DocFormat {
  Markdown,
  ReStructuredText,
  AsciiDoc,
  Textile,
  Org,
  Rdoc,
  MediaWiki,
  Pod,
  PlainText,
};

std::string_view to_string(DocOrigin origin);
std::string_view to_string(DocFormat format);
std::optional<DocOrigin> parse_doc_origin(std::string_view text);
std::optional<DocFormat> parse_doc_format(std::string_view text);

struct DocumentDescriptor {
  DocOrigin origin = DocOrigin::Readme;
  std::string path;
  DocFormat format = DocFormat::Markdown;

  auto operator<=>(const DocumentDescriptor&) const = default;
};

std::set<DocFormat> all_doc_formats();

struct DiscoveryConfig {
  /// Matched case-insensitively against root-level files only.
  std::string readme_glob = "README*";
  /// Gitignore-style globs for further documentation in the source repo.
  std::vector<std::string> extra_doc_globs;
  std::set<DocFormat> format_allowlist = all_doc_formats();

  /// Throws std::invalid_argument for patterns that do not compile or an
  /// empty allowlist.
  void validate() const;
};

/// Maps a path's extension (case-insensitive) through the recognized-markup
/// table.
std::optional<DocFormat> is_recognized_format(std::string_view path);

/// Lexically normalizes a repo-relative path: forward slashes, no `.`/`..`
/// or empty components. Returns nullopt for paths escaping the root.
std::optional<std::string> normalize_repo_path(std::string_view path);

std::vector<DocumentDescriptor> discover_documents(
    std::span<const std::string> source_tree,
    const std::optional<std::vector<std::string>>& wiki_tree,
    const DiscoveryConfig& config = {});

}  // namespace staledoc
