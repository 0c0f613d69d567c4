#include "staledoc/timeline.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace staledoc {

std::string TimelineSymbol::to_string() const {
  switch (kind_) {
    case Kind::DocAbsent: return ".";
    case Kind::NoReference: return "-";
    case Kind::Count: return std::to_string(count_);
  }
  return "?";
}

std::optional<TimelineSymbol> TimelineSymbol::parse(std::string_view token) {
  if (token == ".") return doc_absent();
  if (token == "-") return no_reference();
  std::uint64_t n = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), n);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return count(n);
}

std::string render_symbols(std::span<const TimelineSymbol> symbols) {
  std::string out;
  for (const auto& s : symbols) {
    if (!out.empty()) out += ' ';
    out += s.to_string();
  }
  return out;
}

std::vector<TimelineSymbol> parse_symbols(std::string_view text) {
  std::vector<TimelineSymbol> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (pos == text.size()) break;
    auto end = text.find(' ', pos);
    if (end == std::string_view::npos) end = text.size();
    auto token = text.substr(pos, end - pos);
    auto sym = TimelineSymbol::parse(token);
    if (!sym) throw std::invalid_argument("bad timeline symbol '" + std::string(token) + "'");
    out.push_back(*sym);
    pos = end;
  }
  return out;
}

ElementTimeline build_timeline(std::string element, DocumentDescriptor document,
                               std::span<const LinkedRevision> links, std::span<const DocVersion> versions,
                               const ReferenceLookup& references, const CountsProvider& counts) {
  ElementTimeline timeline{std::move(element), std::move(document), {}, std::nullopt};
  timeline.symbols.reserve(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& link = links[i];
    if (!link.version || !versions[*link.version].present) {
      timeline.symbols.push_back(TimelineSymbol::doc_absent());
      continue;
    }
    if (!references(versions[*link.version])) {
      timeline.symbols.push_back(TimelineSymbol::no_reference());
      continue;
    }
    auto n = counts(link.revision);
    if (!n) {
      timeline.failed_ordinal = i;
      break;
    }
    timeline.symbols.push_back(TimelineSymbol::count(*n));
  }
  return timeline;
}

std::string_view to_string(FixKind kind) {
  switch (kind) {
    case FixKind::DocDelete: return "doc-delete";
    case FixKind::DocUpdate: return "doc-update";
    case FixKind::SourceChange: return "source-change";
  }
  return "unknown";
}

std::optional<FixKind> parse_fix_kind(std::string_view text) {
  for (auto k : {FixKind::DocDelete, FixKind::DocUpdate, FixKind::SourceChange}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

namespace {

bool opens_episode(std::span<const TimelineSymbol> symbols, std::size_t i, bool seen_positive, EpisodeRule rule) {
  if (!seen_positive) return false;
  if (rule == EpisodeRule::Literal) return true;
  for (std::size_t k = i; k-- > 0;) {
    if (symbols[k].is_absent()) continue;
    return symbols[k].is_positive();
  }
  return false;
}

}  // namespace

std::vector<OutdatedEpisode> detect_episodes(const ElementTimeline& timeline, EpisodeRule rule) {
  std::vector<OutdatedEpisode> episodes;
  std::span<const TimelineSymbol> s = timeline.symbols;
  const std::size_t n = s.size();
  bool seen_positive = false;

  std::size_t i = 0;
  while (i < n) {
    if (s[i].is_positive()) {
      seen_positive = true;
      ++i;
      continue;
    }
    if (!s[i].is_zero() || !opens_episode(s, i, seen_positive, rule)) {
      ++i;
      continue;
    }

    OutdatedEpisode ep;
    ep.element = timeline.element;
    ep.document = timeline.document;
    ep.start_ordinal = i;
    std::size_t j = i + 1;
    for (;;) {
      while (j < n && s[j].is_zero()) ++j;
      if (j == n) break;  // ongoing
      if (s[j].is_absent()) {
        std::size_t k = j;
        while (k < n && s[k].is_absent()) ++k;
        if (k < n && s[k].is_zero()) {
          j = k;  // document restored with the reference still stale
          continue;
        }
      }
      ep.end_ordinal = j;
      break;
    }
    episodes.push_back(std::move(ep));
    if (episodes.back().ongoing()) break;
    i = *episodes.back().end_ordinal;
  }
  return episodes;
}

FixEvent classify_fix(const ElementTimeline& timeline, const OutdatedEpisode& episode,
                      const RevisionSequence& source) {
  if (episode.ongoing()) throw std::logic_error("classify_fix: episode is still ongoing");
  const std::size_t end = *episode.end_ordinal;
  if (end >= timeline.symbols.size() || end >= source.size()) {
    throw std::out_of_range("classify_fix: end ordinal outside the timeline");
  }
  const auto& sym = timeline.symbols[end];
  FixKind kind;
  if (sym.is_absent()) kind = FixKind::DocDelete;
  else if (sym.is_no_reference()) kind = FixKind::DocUpdate;
  else if (sym.is_positive()) kind = FixKind::SourceChange;
  else throw std::logic_error("classify_fix: episode ends on a zero symbol");
  return {kind, end, source[end].sha, source[end].timestamp};
}

std::int64_t episode_duration(const OutdatedEpisode& episode, const RevisionSequence& source,
                              std::int64_t scan_time) {
  const std::int64_t start = source[episode.start_ordinal].timestamp;
  if (episode.ongoing()) return scan_time - start;
  return source[*episode.end_ordinal].timestamp - start;
}

std::vector<OutdatedEpisode> analyze_timeline(const ElementTimeline& timeline, const RevisionSequence& source,
                                              std::int64_t scan_time, EpisodeRule rule) {
  auto episodes = detect_episodes(timeline, rule);
  for (auto& ep : episodes) {
    ep.start_sha = source[ep.start_ordinal].sha;
    ep.start_timestamp = source[ep.start_ordinal].timestamp;
    if (!ep.ongoing()) ep.fix = classify_fix(timeline, ep, source);
    ep.duration_seconds = episode_duration(ep, source, scan_time);
  }
  return episodes;
}

std::vector<std::int64_t> survival_durations(std::span<const OutdatedEpisode> episodes) {
  std::vector<std::int64_t> out;
  for (const auto& ep : episodes) {
    if (ep.fix && ep.duration_seconds > 0) out.push_back(ep.duration_seconds);
  }
  return out;
}

std::vector<SurvivalPoint> survival_curve(std::span<const std::int64_t> durations,
                                          std::span<const std::int64_t> grid) {
  std::vector<SurvivalPoint> curve;
  if (durations.empty()) return curve;
  std::vector<std::int64_t> sorted(durations.begin(), durations.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::int64_t> points(grid.begin(), grid.end());
  std::sort(points.begin(), points.end());
  const auto total = static_cast<double>(sorted.size());
  for (auto d : points) {
    auto greater = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), d);
    curve.push_back({d, static_cast<double>(greater) / total});
  }
  return curve;
}

std::vector<std::int64_t> default_survival_grid() {
  constexpr std::int64_t day = 86'400;
  return {0, day, 7 * day, 30 * day, 91 * day, 182 * day, 365 * day, 730 * day, 1826 * day, 3652 * day};
}

}  // namespace staledoc
