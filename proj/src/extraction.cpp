#include "staledoc/extraction.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>
#include <unordered_set>

namespace staledoc {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t codepoint_count(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

void blank(std::string& text, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end && i < text.size(); ++i) {
    if (text[i] != '\n') text[i] = ' ';
  }
}

const std::regex& inline_code_regex() {
  static const std::regex re("`[^`\\n]+`");
  return re;
}

const std::regex& url_regex() {
  static const std::regex re(
      "(?:\\b[A-Za-z][A-Za-z0-9+.-]*://|\\bwww\\.|\\bmailto:)[^\\s<>()\\[\\]\"'`]+",
      std::regex::optimize);
  return re;
}

const std::regex& link_destination_regex() {
  static const std::regex re("\\]\\(([^()\\s]*(?:\\([^()\\s]*\\)[^()\\s]*)*(?:\\s+\"[^\"\\n]*\")?)\\)",
                             std::regex::optimize);
  return re;
}

// Masks bare URLs and markdown link destinations that lie outside inline
// code spans; URLs written inside backticks stay visible.
std::string mask_links(std::string text) {
  std::vector<Span> code;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), inline_code_regex());
       it != std::sregex_iterator(); ++it) {
    auto begin = static_cast<std::size_t>(it->position(0));
    code.push_back({begin, begin + static_cast<std::size_t>(it->length(0))});
  }
  auto in_code = [&](std::size_t b, std::size_t e) {
    return std::any_of(code.begin(), code.end(),
                       [&](const Span& s) { return b < s.end && s.begin < e; });
  };

  std::vector<Span> masks;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), link_destination_regex());
       it != std::sregex_iterator(); ++it) {
    auto b = static_cast<std::size_t>(it->position(1));
    auto e = b + static_cast<std::size_t>(it->length(1));
    if (!in_code(b, e)) masks.push_back({b, e});
  }
  for (auto it = std::sregex_iterator(text.begin(), text.end(), url_regex());
       it != std::sregex_iterator(); ++it) {
    auto b = static_cast<std::size_t>(it->position(0));
    auto e = b + static_cast<std::size_t>(it->length(0));
    if (!in_code(b, e)) masks.push_back({b, e});
  }
  for (const auto& m : masks) blank(text, m.begin, m.end);
  return text;
}

struct Candidate {
  Span span;
  std::size_t rule_index;
};

}  // namespace

const RegexRule* RegexCatalog::find(std::string_view id) const {
  for (const auto& r : rules) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

RegexCatalog load_catalog(std::string_view source) {
  RegexCatalog catalog;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < source.size()) {
    auto nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    std::string_view line = source.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim_view(line).empty()) continue;
    if (line.front() == '#') {
      auto body = trim_view(line.substr(1));
      if (body.starts_with("version:")) catalog.version = trim_view(body.substr(8));
      continue;
    }

    auto tab1 = line.find('\t');
    auto tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos) {
      throw CatalogError("catalog line " + std::to_string(line_no) +
                             ": expected id<TAB>capture-group<TAB>pattern",
                         std::string(trim_view(line.substr(0, tab1))), line_no);
    }
    RegexRule rule;
    rule.id = std::string(trim_view(line.substr(0, tab1)));
    auto group_text = trim_view(line.substr(tab1 + 1, tab2 - tab1 - 1));
    rule.pattern = std::string(line.substr(tab2 + 1));
    if (rule.id.empty()) throw CatalogError("catalog line " + std::to_string(line_no) + ": empty rule id", "", line_no);

    auto [ptr, ec] = std::from_chars(group_text.data(), group_text.data() + group_text.size(), rule.capture_group);
    if (ec != std::errc{} || ptr != group_text.data() + group_text.size()) {
      throw CatalogError("rule '" + rule.id + "' (line " + std::to_string(line_no) +
                             "): capture group is not a non-negative integer",
                         rule.id, line_no);
    }
    if (!ids.insert(rule.id).second) {
      throw CatalogError("duplicate rule id '" + rule.id + "' at line " + std::to_string(line_no),
                         rule.id, line_no);
    }
    try {
      rule.compiled = std::regex(rule.pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw CatalogError("rule '" + rule.id + "' (line " + std::to_string(line_no) +
                             "): pattern does not compile: " + e.what(),
                         rule.id, line_no);
    }
    if (rule.capture_group > rule.compiled.mark_count()) {
      throw CatalogError("rule '" + rule.id + "' (line " + std::to_string(line_no) + "): capture group " +
                             std::to_string(rule.capture_group) + " does not exist in pattern",
                         rule.id, line_no);
    }
    catalog.rules.push_back(std::move(rule));
  }
  if (catalog.rules.empty()) throw CatalogError("catalog contains no rules", "", 0);
  return catalog;
}

std::string mask_fenced_blocks(std::string_view text) {
  std::string out(text);
  bool inside = false;
  std::size_t pos = 0;
  while (pos < out.size()) {
    auto nl = out.find('\n', pos);
    std::size_t end = nl == std::string::npos ? out.size() : nl;
    std::string_view line(out.data() + pos, end - pos);

    std::size_t indent = 0;
    while (indent < line.size() && indent < 3 && line[indent] == ' ') ++indent;
    std::size_t ticks = 0;
    while (indent + ticks < line.size() && line[indent + ticks] == '`') ++ticks;
    bool is_fence = ticks >= 3;

    if (!inside) {
      if (is_fence) {
        inside = true;
        blank(out, pos + indent + ticks, end);  // info string
      }
    } else if (is_fence && trim_view(line.substr(indent + ticks)).empty()) {
      inside = false;
    } else {
      blank(out, pos, end);
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::string sanitize_utf8(std::string_view bytes) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  auto cont = [&](std::size_t k) {
    return k < bytes.size() && (static_cast<unsigned char>(bytes[k]) & 0xC0) == 0x80;
  };
  while (i < bytes.size()) {
    auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    if (c < 0x80) len = 1;
    else if (c >= 0xC2 && c <= 0xDF) len = 2;
    else if (c >= 0xE0 && c <= 0xEF) len = 3;
    else if (c >= 0xF0 && c <= 0xF4) len = 4;

    bool valid = len > 0;
    for (std::size_t k = 1; valid && k < len; ++k) valid = cont(i + k);
    if (valid && len == 3) {
      auto c1 = static_cast<unsigned char>(bytes[i + 1]);
      valid = !(c == 0xE0 && c1 < 0xA0) && !(c == 0xED && c1 >= 0xA0);
    }
    if (valid && len == 4) {
      auto c1 = static_cast<unsigned char>(bytes[i + 1]);
      valid = !(c == 0xF0 && c1 < 0x90) && !(c == 0xF4 && c1 >= 0x90);
    }
    if (valid) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out.append(kReplacement);
      ++i;
    }
  }
  return out;
}

std::vector<CodeElementRef> extract_elements(std::string_view text, const RegexCatalog& catalog,
                                             const DocumentDescriptor& document) {
  std::vector<CodeElementRef> refs;
  if (text.empty()) return refs;

  const std::string masked = mask_links(mask_fenced_blocks(text));

  std::vector<Candidate> candidates;
  for (std::size_t r = 0; r < catalog.rules.size(); ++r) {
    const auto& rule = catalog.rules[r];
    for (auto it = std::sregex_iterator(masked.begin(), masked.end(), rule.compiled);
         it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      if (!m[rule.capture_group].matched) continue;
      auto begin = static_cast<std::size_t>(m.position(rule.capture_group));
      auto end = begin + static_cast<std::size_t>(m.length(rule.capture_group));
      // Trim whitespace so the span covers exactly the element.
      while (begin < end && is_space(masked[begin])) ++begin;
      while (end > begin && is_space(masked[end - 1])) --end;
      if (end <= begin) continue;
      std::string_view found(masked.data() + begin, end - begin);
      if (found != text.substr(begin, end - begin)) continue;  // touches a masked region
      if (found.find('\n') != std::string_view::npos) continue;
      if (codepoint_count(found) < 2) continue;
      candidates.push_back({{begin, end}, r});
    }
  }

  // Earliest start wins; at equal starts the longer span, then catalog order.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tuple(a.span.begin, b.span.end, a.rule_index) <
           std::tuple(b.span.begin, a.span.end, b.rule_index);
  });

  std::unordered_set<std::string_view> seen;
  std::size_t covered_until = 0;
  for (const auto& c : candidates) {
    if (c.span.begin < covered_until) continue;
    covered_until = c.span.end;
    std::string_view element = text.substr(c.span.begin, c.span.end - c.span.begin);
    if (!seen.insert(element).second) continue;
    refs.push_back({std::string(element), catalog.rules[c.rule_index].id, document, c.span});
  }
  return refs;
}

}  // namespace staledoc
