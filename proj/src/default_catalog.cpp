#include <array>
#include <utility>

#include "staledoc/extraction.hpp"

namespace staledoc {
namespace {

// Tab-separated: id, capture group, ECMAScript pattern. There is no rule for
// bare URLs; URLs only surface through the backtick rule.
constexpr std::string_view kDefaultCatalog =
    "# staledoc default code-element catalog\n"
    "# version: 1\n"
    "#\n"
    "# id\tgroup\tpattern\n"
    "backtick\t1\t`([^`\\n]+)`\n"
    "class-template\t0\t[A-Z][a-zA-Z]+ ?<[A-Z][a-zA-Z]*>\n"
    "qualified-call\t1\t\\b([A-Za-z_][A-Za-z0-9_]*(?:(?:\\.|::|->)[A-Za-z_][A-Za-z0-9_]*)+\\([^()\\n]*\\))\n"
    "call\t1\t\\b([A-Za-z_][A-Za-z0-9_]*\\(\\))\n"
    "camel-case\t1\t\\b([a-z][a-z0-9]*[A-Z][A-Za-z0-9]*)\\b\n"
    "pascal-case\t1\t\\b([A-Z][a-z0-9]+[A-Z][A-Za-z0-9]*)\\b\n"
    "upper-snake\t1\t\\b([A-Z][A-Z0-9]*_[A-Z0-9_]*[A-Z0-9])\\b\n"
    "snake-case\t1\t\\b([a-z][a-z0-9]*_[a-z0-9_]*[a-z0-9])\\b\n"
    "file-path\t1\t(?:^|[\\s(\\[\"'])((?:\\.{1,2}/|/)?(?:[A-Za-z0-9_.-]+/)*[A-Za-z0-9_-]+\\."
    "(?:c|cc|cpp|cxx|h|hh|hpp|hxx|m|mm|java|kt|scala|go|rs|py|rb|php|pl|pm|js|jsx|mjs|ts|tsx|vue|"
    "cs|fs|swift|dart|lua|r|jl|hs|ex|exs|erl|clj|el|sh|bash|zsh|ps1|bat|cmd|json|yaml|yml|toml|"
    "ini|cfg|conf|xml|html|css|scss|less|sql|proto|gradle|cmake|mk|am|ac|m4|in|lock|txt|md|rst|"
    "properties|env|dockerfile))(?=$|[\\s)\\]\"',;:!?]|\\.(?:\\s|$))\n";

constexpr std::array<std::pair<std::string_view, RuleOrigin>, 9> kOrigins{{
    {"backtick", RuleOrigin::Added},
    {"class-template", RuleOrigin::Original},
    {"qualified-call", RuleOrigin::Modified},
    {"call", RuleOrigin::Modified},
    {"camel-case", RuleOrigin::Modified},
    {"pascal-case", RuleOrigin::Modified},
    {"upper-snake", RuleOrigin::Modified},
    {"snake-case", RuleOrigin::Modified},
    {"file-path", RuleOrigin::Modified},
}};

}  // namespace

std::string_view default_catalog_text() { return kDefaultCatalog; }

const RegexCatalog& default_catalog() {
  static const RegexCatalog catalog = [] {
    RegexCatalog c = load_catalog(kDefaultCatalog);
    for (auto& rule : c.rules) {
      for (const auto& [id, origin] : kOrigins) {
        if (rule.id == id) rule.origin = origin;
      }
    }
    return c;
  }();
  return catalog;
}

}  // namespace staledoc
