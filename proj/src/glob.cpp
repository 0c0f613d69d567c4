#include "staledoc/glob.hpp"

namespace staledoc {
namespace {

std::string translate(std::string_view body, std::string_view original) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    switch (c) {
      case '*':
        if (i + 1 < body.size() && body[i + 1] == '*') {
          bool at_segment_start = i == 0 || body[i - 1] == '/';
          bool slash_after = i + 2 < body.size() && body[i + 2] == '/';
          if (at_segment_start && slash_after) {
            out += "(?:.*/)?";
            i += 2;
          } else {
            out += ".*";
            ++i;
          }
        } else {
          out += "[^/]*";
        }
        break;
      case '?':
        out += "[^/]";
        break;
      case '[': {
        auto close = body.find(']', i + 2);
        if (close == std::string_view::npos) {
          throw GlobError("unterminated character class in pattern '" + std::string(original) + "'");
        }
        std::string_view cls = body.substr(i + 1, close - i - 1);
        out += '[';
        if (!cls.empty() && cls.front() == '!') {
          out += '^';
          cls.remove_prefix(1);
        }
        for (char k : cls) {
          if (k == '\\' || k == '[' || k == ']') out += '\\';
          out += k;
        }
        out += ']';
        i = close;
        break;
      }
      case '\\':
        if (i + 1 < body.size()) {
          ++i;
          out += '\\';
          out += body[i];
        } else {
          throw GlobError("dangling escape in pattern '" + std::string(original) + "'");
        }
        break;
      case '.': case '+': case '(': case ')': case '{': case '}':
      case '^': case '$': case '|':
        out += '\\';
        out += c;
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

GlobPattern::GlobPattern(std::string_view pattern, bool case_insensitive) : source_(pattern) {
  std::string_view body = pattern;
  if (!body.empty() && body.front() == '!') {
    negated_ = true;
    body.remove_prefix(1);
  }
  bool dir_only = false;
  if (!body.empty() && body.back() == '/') {
    dir_only = true;
    body.remove_suffix(1);
  }
  if (body.empty()) throw GlobError("empty glob pattern");

  bool anchored = body.find('/') != std::string_view::npos;
  if (body.front() == '/') body.remove_prefix(1);
  if (body.empty()) throw GlobError("glob pattern '" + source_ + "' matches only the root");

  std::string expr = anchored ? "^" : "^(?:.*/)?";
  expr += translate(body, source_);
  expr += dir_only ? "/.*$" : "(?:/.*)?$";

  auto flags = std::regex::ECMAScript | std::regex::optimize;
  if (case_insensitive) flags |= std::regex::icase;
  try {
    regex_ = std::regex(expr, flags);
  } catch (const std::regex_error& e) {
    throw GlobError("invalid glob pattern '" + source_ + "': " + e.what());
  }
}

bool GlobPattern::matches(std::string_view path) const {
  return std::regex_match(path.begin(), path.end(), regex_);
}

PathFilter::PathFilter(const std::vector<std::string>& patterns) {
  for (const auto& p : patterns) add(p);
}

void PathFilter::add(std::string_view pattern) { patterns_.emplace_back(pattern); }

bool PathFilter::excluded(std::string_view path) const {
  bool result = false;
  for (const auto& p : patterns_) {
    if (p.matches(path)) result = !p.negated();
  }
  return result;
}

}  // namespace staledoc
