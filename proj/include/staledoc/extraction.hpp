#pragma once

#include <cstddef>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "staledoc/docdiscovery.hpp"

namespace staledoc {

enum class RuleOrigin { Original, Added, Modified };

struct RegexRule {
  std::string id;
  std::string pattern;
  std::size_t capture_group = 0;
  RuleOrigin origin = RuleOrigin::Original;
  std::regex compiled;
};

struct RegexCatalog {
  std::vector<RegexRule> rules;
  std::string version;

  const RegexRule* find(std::string_view id) const;
};

class CatalogError : public std::runtime_error {
 public:
  CatalogError(std::string message, std::string rule_id, std::size_t line)
      : std::runtime_error(std::move(message)), rule_id_(std::move(rule_id)), line_(line) {}

  const std::string& rule_id() const { return rule_id_; }
  /// 1-based line in the catalog source.
  std::size_t line() const { return line_; }

 private:
  std::string rule_id_;
  std::size_t line_;
};

/// Parses `id<TAB>capture-group<TAB>pattern` lines. `#` starts a comment
/// line; blank lines are ignored.
RegexCatalog load_catalog(std::string_view source);

/// The catalog shipped with the tool, byte-stable across runs.
std::string_view default_catalog_text();
const RegexCatalog& default_catalog();

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  auto operator<=>(const Span&) const = default;
};

struct CodeElementRef {
  std::string text;
  std::string rule_id;
  DocumentDescriptor document;
  Span span;
};

/// Replaces the interior of every line-anchored ``` fence with spaces,
/// preserving newlines. An unterminated fence masks through end of text.
std::string mask_fenced_blocks(std::string_view text);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

/// Extracts candidate code-element references. `text` is expected to be
/// valid UTF-8 (see sanitize_utf8); spans index into it. Results are unique
/// by text and ordered by first occurrence.
std::vector<CodeElementRef> extract_elements(std::string_view text, const RegexCatalog& catalog,
                                             const DocumentDescriptor& document = {});

}  // namespace staledoc
