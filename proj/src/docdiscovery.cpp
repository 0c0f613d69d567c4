#include "staledoc/docdiscovery.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <utility>

#include "staledoc/glob.hpp"

namespace staledoc {
namespace {

constexpr std::array<std::pair<std::string_view, DocFormat>, 15> kExtensions{{
    {"md", DocFormat::Markdown},
    {"markdown", DocFormat::Markdown},
    {"mdown", DocFormat::Markdown},
    {"mkdn", DocFormat::Markdown},
    {"rst", DocFormat::ReStructuredText},
    {"adoc", DocFormat::AsciiDoc},
    {"asciidoc", DocFormat::AsciiDoc},
    {"asc", DocFormat::AsciiDoc},
    {"textile", DocFormat::Textile},
    {"org", DocFormat::Org},
    {"rdoc", DocFormat::Rdoc},
    {"mediawiki", DocFormat::MediaWiki},
    {"wiki", DocFormat::MediaWiki},
    {"pod", DocFormat::Pod},
    {"txt", DocFormat::PlainText},
}};

constexpr std::array<std::pair<DocFormat, std::string_view>, 9> kFormatNames{{
    {DocFormat::Markdown, "markdown"},
    {DocFormat::ReStructuredText, "restructuredtext"},
    {DocFormat::AsciiDoc, "asciidoc"},
    {DocFormat::Textile, "textile"},
    {DocFormat::Org, "org"},
    {DocFormat::Rdoc, "rdoc"},
    {DocFormat::MediaWiki, "mediawiki"},
    {DocFormat::Pod, "pod"},
    {DocFormat::PlainText, "plaintext"},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view basename(std::string_view path) {
  auto slash = path.rfind('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

}  // namespace

std::string_view to_string(DocOrigin origin) {
  return origin == DocOrigin::Readme ? "readme" : "wiki";
}

std::string_view to_string(DocFormat format) {
  for (const auto& [f, name] : kFormatNames) {
    if (f == format) return name;
  }
  return "plaintext";
}

std::optional<DocOrigin> parse_doc_origin(std::string_view text) {
  if (text == "readme") return DocOrigin::Readme;
  if (text == "wiki") return DocOrigin::Wiki;
  return std::nullopt;
}

std::optional<DocFormat> parse_doc_format(std::string_view text) {
  for (const auto& [f, name] : kFormatNames) {
    if (name == text) return f;
  }
  return std::nullopt;
}

std::set<DocFormat> all_doc_formats() {
  std::set<DocFormat> out;
  for (const auto& [f, name] : kFormatNames) out.insert(f);
  return out;
}

void DiscoveryConfig::validate() const {
  if (format_allowlist.empty()) {
    throw std::invalid_argument("documentation format allowlist is empty");
  }
  GlobPattern readme(readme_glob, true);
  if (readme_glob.find('/') != std::string::npos) {
    throw std::invalid_argument("readme glob must not contain '/': " + readme_glob);
  }
  for (const auto& g : extra_doc_globs) GlobPattern check(g);
}

std::optional<DocFormat> is_recognized_format(std::string_view path) {
  auto name = basename(path);
  auto dot = name.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == name.size()) return std::nullopt;
  std::string ext = lower(name.substr(dot + 1));
  for (const auto& [e, format] : kExtensions) {
    if (e == ext) return format;
  }
  return std::nullopt;
}

std::optional<std::string> normalize_repo_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto next = path.find_first_of("/\\", pos);
    if (next == std::string_view::npos) next = path.size();
    auto part = path.substr(pos, next - pos);
    if (part == "..") {
      if (parts.empty()) return std::nullopt;
      parts.pop_back();
    } else if (!part.empty() && part != ".") {
      parts.push_back(part);
    }
    pos = next + 1;
  }
  if (parts.empty()) return std::nullopt;
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

std::vector<DocumentDescriptor> discover_documents(
    std::span<const std::string> source_tree,
    const std::optional<std::vector<std::string>>& wiki_tree, const DiscoveryConfig& config) {
  GlobPattern readme(config.readme_glob, true);
  PathFilter extra(config.extra_doc_globs);
  auto allowed = [&](DocFormat f) { return config.format_allowlist.contains(f); };

  std::vector<DocumentDescriptor> docs;
  for (const auto& path : source_tree) {
    if (normalize_repo_path(path) != path) continue;
    bool root_level = path.find('/') == std::string::npos;
    std::optional<DocFormat> format = is_recognized_format(path);
    if (root_level && readme.matches(path)) {
      // An extensionless README renders as plain text.
      if (!format && basename(path).find('.') == std::string_view::npos) {
        format = DocFormat::PlainText;
      }
    } else if (extra.empty() || !extra.excluded(path)) {
      continue;
    }
    if (format && allowed(*format)) docs.push_back({DocOrigin::Readme, path, *format});
  }
  if (wiki_tree) {
    for (const auto& path : *wiki_tree) {
      if (normalize_repo_path(path) != path) continue;
      auto format = is_recognized_format(path);
      if (format && allowed(*format)) docs.push_back({DocOrigin::Wiki, path, *format});
    }
  }
  std::sort(docs.begin(), docs.end());
  docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
  return docs;
}

}  // namespace staledoc
