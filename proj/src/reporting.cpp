#include "staledoc/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace staledoc {

using ojson = nlohmann::ordered_json;

std::string_view to_string(ReportMode mode) {
  return mode == ReportMode::Current ? "current" : "history";
}

std::optional<ReportMode> parse_report_mode(std::string_view text) {
  if (text == "current") return ReportMode::Current;
  if (text == "history") return ReportMode::History;
  return std::nullopt;
}

std::optional<OutputFormat> parse_output_format(std::string_view text) {
  if (text == "json") return OutputFormat::Json;
  if (text == "csv") return OutputFormat::Csv;
  if (text == "md" || text == "markdown") return OutputFormat::Markdown;
  return std::nullopt;
}

bool Finding::outdated() const {
  if (status) return *status == CurrentStatus::Outdated;
  return !episodes.empty();
}

bool Finding::currently_outdated() const {
  if (status == CurrentStatus::Outdated) return true;
  return std::any_of(episodes.begin(), episodes.end(), [](const OutdatedEpisode& e) { return e.ongoing(); });
}

void sort_findings(std::vector<Finding>& findings) {
  std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    if (a.document != b.document) return a.document < b.document;
    return a.element < b.element;
  });
}

// ---------------------------------------------------------------------------
// Aggregates

std::optional<DurationStats> duration_stats(std::span<const std::int64_t> durations) {
  if (durations.empty()) return std::nullopt;
  std::vector<std::int64_t> v(durations.begin(), durations.end());
  std::sort(v.begin(), v.end());
  DurationStats s;
  s.count = v.size();
  s.min = v.front();
  s.max = v.back();
  long double sum = 0;
  for (auto d : v) sum += static_cast<long double>(d);
  s.mean = static_cast<double>(sum / static_cast<long double>(v.size()));
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 == 1 ? static_cast<double>(v[mid])
                               : (static_cast<double>(v[mid - 1]) + static_cast<double>(v[mid])) / 2.0;
  return s;
}

namespace {

double ratio(std::uint64_t part, std::uint64_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

struct RawDurations {
  std::vector<std::int64_t> fixed;
  std::vector<std::int64_t> outdated;
};

// Counts everything except totals and duration summaries; collects the raw
// durations so they can be pooled across reports.
Aggregates count_findings(std::span<const Finding> findings, std::int64_t scan_time, RawDurations& raw) {
  Aggregates a;
  std::set<DocumentDescriptor> outdated_docs;
  std::uint64_t pairs_with_episodes = 0;
  for (const auto& f : findings) {
    if (f.outdated()) {
      ++a.elements_outdated;
      outdated_docs.insert(f.document);
    }
    if (f.status == CurrentStatus::Outdated && f.deletion) raw.outdated.push_back(scan_time - f.deletion->timestamp);
    if (!f.episodes.empty()) ++pairs_with_episodes;
    for (const auto& ep : f.episodes) {
      ++a.episodes_total;
      if (ep.ongoing()) {
        ++a.episodes_ongoing;
        raw.outdated.push_back(ep.duration_seconds);
        continue;
      }
      if (ep.fix) {
        switch (ep.fix->kind) {
          case FixKind::DocDelete: ++a.fix_doc_delete; break;
          case FixKind::DocUpdate: ++a.fix_doc_update; break;
          case FixKind::SourceChange: ++a.fix_source_change; break;
        }
      }
      if (ep.duration_seconds < 0) ++a.negative_durations;
    }
    auto positive = survival_durations(f.episodes);
    raw.fixed.insert(raw.fixed.end(), positive.begin(), positive.end());
  }
  a.documents_outdated = outdated_docs.size();
  a.reoutdated_count = a.episodes_total - pairs_with_episodes;
  return a;
}

void finish(Aggregates& a, const RawDurations& raw) {
  a.fixed_durations = duration_stats(raw.fixed);
  a.outdated_durations = duration_stats(raw.outdated);
  const auto grid = default_survival_grid();
  a.survival = survival_curve(raw.fixed, grid);
}

}  // namespace

double Aggregates::element_rate() const { return ratio(elements_outdated, elements_total); }
double Aggregates::document_rate() const { return ratio(documents_outdated, documents_total); }
double Aggregates::project_rate() const { return ratio(projects_outdated, projects_total); }

Aggregates compute_aggregates(std::span<const Finding> findings, std::uint64_t elements_total,
                              std::uint64_t documents_total, std::int64_t scan_time) {
  RawDurations raw;
  Aggregates a = count_findings(findings, scan_time, raw);
  a.elements_total = elements_total;
  a.documents_total = documents_total;
  a.projects_total = 1;
  a.project_outdated = a.documents_outdated > 0;
  a.projects_outdated = a.project_outdated ? 1 : 0;
  finish(a, raw);
  return a;
}

Aggregates aggregate_corpus(std::span<const ScanReport> reports) {
  Aggregates total;
  RawDurations raw;
  for (const auto& r : reports) {
    Aggregates a = count_findings(r.findings, r.scan_time, raw);
    total.elements_total += r.aggregates.elements_total;
    total.documents_total += r.aggregates.documents_total;
    total.elements_outdated += a.elements_outdated;
    total.documents_outdated += a.documents_outdated;
    total.projects_total += 1;
    if (a.documents_outdated > 0) total.projects_outdated += 1;
    total.episodes_total += a.episodes_total;
    total.episodes_ongoing += a.episodes_ongoing;
    total.fix_doc_delete += a.fix_doc_delete;
    total.fix_doc_update += a.fix_doc_update;
    total.fix_source_change += a.fix_source_change;
    total.reoutdated_count += a.reoutdated_count;
    total.negative_durations += a.negative_durations;
  }
  total.project_outdated = total.projects_outdated > 0;
  finish(total, raw);
  return total;
}

// ---------------------------------------------------------------------------
// Time and URLs

std::string format_rfc3339(std::int64_t epoch_seconds) {
  std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::int64_t> parse_rfc3339(std::string_view text) {
  static const std::regex re(
      R"(^(\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2})(?:\.\d+)?(?:([Zz])|([+-])(\d{2}):(\d{2}))$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, re)) return std::nullopt;
  auto num = [&](int i) { return std::stoi(m[i].str()); };
  std::tm tm{};
  tm.tm_year = num(1) - 1900;
  tm.tm_mon = num(2) - 1;
  tm.tm_mday = num(3);
  tm.tm_hour = num(4);
  tm.tm_min = num(5);
  tm.tm_sec = num(6);
  if (tm.tm_mon > 11 || tm.tm_mday < 1 || tm.tm_mday > 31 || tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 60) {
    return std::nullopt;
  }
  std::int64_t t = timegm(&tm);
  if (m[8].matched) {
    std::int64_t offset = num(9) * 3600 + num(10) * 60;
    t += m[8].str() == "+" ? -offset : offset;
  }
  return t;
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

std::string wiki_page_name(std::string_view path) {
  auto slash = path.rfind('/');
  if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
  auto dot = path.rfind('.');
  if (dot != std::string_view::npos && dot > 0) path = path.substr(0, dot);
  std::string page(path);
  std::replace(page.begin(), page.end(), ' ', '-');
  return page;
}

}  // namespace

std::string UrlTemplates::source_url(std::string_view sha, std::string_view path, std::size_t line) const {
  if (!enabled()) return {};
  std::string url = blob;
  if (line == 0) replace_all(url, "#L{line}", "");
  replace_all(url, "{base}", base);
  replace_all(url, "{sha}", sha);
  replace_all(url, "{path}", path);
  replace_all(url, "{line}", std::to_string(line));
  return url;
}

std::string UrlTemplates::document_url(const DocumentDescriptor& document, std::string_view sha) const {
  if (!enabled()) return {};
  if (document.origin == DocOrigin::Readme) return source_url(sha, document.path, 0);
  std::string url = wiki;
  replace_all(url, "{base}", base);
  replace_all(url, "{page}", wiki_page_name(document.path));
  replace_all(url, "{sha}", sha);
  return url;
}

std::optional<std::string> github_base_from_remote(std::string_view remote_url) {
  static const std::regex re(
      R"(^(?:https?://(?:[^@/]+@)?|ssh://(?:[^@/]+@)?|git://|[^@/:]+@)github\.com[:/]([^/]+)/([^/]+?)(?:\.git)?/?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(remote_url.begin(), remote_url.end(), m, re)) return std::nullopt;
  return "https://github.com/" + m[1].str() + "/" + m[2].str();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ojson commit_json(const std::optional<CommitRef>& c, std::string_view field) {
  return c ? ojson(field == "sha" ? ojson(c->sha) : ojson(c->timestamp)) : ojson(nullptr);
}

ojson document_json(const DocumentDescriptor& d) {
  ojson j;
  j["origin"] = to_string(d.origin);
  j["path"] = d.path;
  j["format"] = to_string(d.format);
  return j;
}

ojson episode_json(const OutdatedEpisode& ep) {
  ojson j;
  j["start_ordinal"] = ep.start_ordinal;
  j["start_sha"] = ep.start_sha;
  j["start_timestamp"] = ep.start_timestamp;
  j["end_ordinal"] = ep.end_ordinal ? ojson(*ep.end_ordinal) : ojson(nullptr);
  if (ep.fix) {
    ojson f;
    f["kind"] = to_string(ep.fix->kind);
    f["ordinal"] = ep.fix->ordinal;
    f["sha"] = ep.fix->sha;
    f["timestamp"] = ep.fix->timestamp;
    j["fix"] = std::move(f);
  } else {
    j["fix"] = nullptr;
  }
  j["duration_seconds"] = ep.duration_seconds;
  j["ongoing"] = ep.ongoing();
  return j;
}

ojson finding_json(const Finding& f) {
  ojson j;
  j["element"] = f.element;
  j["document"] = document_json(f.document);
  j["document_sha"] = commit_json(f.document_commit, "sha");
  j["document_timestamp"] = commit_json(f.document_commit, "timestamp");
  j["document_url"] = f.document_url;
  j["status"] = f.status ? ojson(to_string(*f.status)) : ojson(nullptr);
  j["snapshot_sha"] = commit_json(f.snapshot, "sha");
  j["snapshot_timestamp"] = commit_json(f.snapshot, "timestamp");
  j["snapshot_count"] = f.snapshot_count;
  j["current_sha"] = commit_json(f.current, "sha");
  j["current_timestamp"] = commit_json(f.current, "timestamp");
  j["current_count"] = f.current_count;
  j["deletion_sha"] = commit_json(f.deletion, "sha");
  j["deletion_timestamp"] = commit_json(f.deletion, "timestamp");
  ojson ev = ojson::array();
  for (const auto& e : f.evidence) {
    ojson x;
    x["path"] = e.path;
    x["line"] = e.line;
    x["path_variant"] = e.path_variant;
    x["url"] = e.url;
    ev.push_back(std::move(x));
  }
  j["evidence"] = std::move(ev);
  j["timeline"] = f.timeline ? ojson(*f.timeline) : ojson(nullptr);
  ojson eps = ojson::array();
  for (const auto& ep : f.episodes) eps.push_back(episode_json(ep));
  j["episodes"] = std::move(eps);
  return j;
}

ojson stats_json(const std::optional<DurationStats>& s) {
  if (!s) return nullptr;
  ojson j;
  j["count"] = s->count;
  j["min"] = s->min;
  j["max"] = s->max;
  j["mean"] = s->mean;
  j["median"] = s->median;
  return j;
}

ojson aggregates_json(const Aggregates& a) {
  ojson j;
  j["elements_total"] = a.elements_total;
  j["elements_outdated"] = a.elements_outdated;
  j["element_rate"] = a.element_rate();
  j["documents_total"] = a.documents_total;
  j["documents_outdated"] = a.documents_outdated;
  j["document_rate"] = a.document_rate();
  j["projects_total"] = a.projects_total;
  j["projects_outdated"] = a.projects_outdated;
  j["project_rate"] = a.project_rate();
  j["project_outdated"] = a.project_outdated;
  j["episodes_total"] = a.episodes_total;
  j["episodes_ongoing"] = a.episodes_ongoing;
  ojson fixes;
  fixes["doc_delete"] = a.fix_doc_delete;
  fixes["doc_update"] = a.fix_doc_update;
  fixes["source_change"] = a.fix_source_change;
  j["fix_kind_counts"] = std::move(fixes);
  j["reoutdated_count"] = a.reoutdated_count;
  j["negative_durations"] = a.negative_durations;
  j["fixed_durations"] = stats_json(a.fixed_durations);
  j["outdated_durations"] = stats_json(a.outdated_durations);
  ojson curve = ojson::array();
  for (const auto& p : a.survival) curve.push_back({{"duration", p.duration}, {"surviving", p.surviving}});
  j["survival"] = std::move(curve);
  return j;
}

ojson report_json(const ScanReport& r) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["project"] = r.project;
  j["scan_time"] = format_rfc3339(r.scan_time);
  j["mode"] = to_string(r.mode);
  j["partial"] = r.partial;
  j["source_head_sha"] = commit_json(r.source_head, "sha");
  j["source_head_timestamp"] = commit_json(r.source_head, "timestamp");
  j["wiki_head_sha"] = commit_json(r.wiki_head, "sha");
  j["wiki_head_timestamp"] = commit_json(r.wiki_head, "timestamp");
  j["revisions_total"] = r.revisions_total;
  ojson revs = ojson::array();
  for (const auto& rev : r.revisions) {
    revs.push_back({{"ordinal", rev.ordinal}, {"sha", rev.sha}, {"timestamp", rev.timestamp}});
  }
  j["revisions"] = std::move(revs);
  ojson findings = ojson::array();
  for (const auto& f : r.findings) findings.push_back(finding_json(f));
  j["findings"] = std::move(findings);
  ojson timelines = ojson::array();
  for (const auto& t : r.timelines) {
    ojson x;
    x["element"] = t.element;
    x["document"] = document_json(t.document);
    x["symbols"] = render_symbols(t.symbols);
    x["failed_ordinal"] = t.failed_ordinal ? ojson(*t.failed_ordinal) : ojson(nullptr);
    timelines.push_back(std::move(x));
  }
  j["timelines"] = std::move(timelines);
  ojson warnings = ojson::array();
  for (const auto& w : r.warnings) {
    warnings.push_back({{"kind", w.kind}, {"path", w.path}, {"object", w.object}, {"message", w.message}});
  }
  j["warnings"] = std::move(warnings);
  j["aggregates"] = aggregates_json(r.aggregates);
  return j;
}

// Parsing helpers. nlohmann throws json::exception on type mismatches; the
// caller converts those to ReportFormatError.

std::optional<CommitRef> parse_commit(const ojson& j, const std::string& prefix) {
  const auto& sha = j.at(prefix + "_sha");
  if (sha.is_null()) return std::nullopt;
  return CommitRef{sha.get<std::string>(), j.at(prefix + "_timestamp").get<std::int64_t>()};
}

DocumentDescriptor parse_document(const ojson& j) {
  DocumentDescriptor d;
  auto origin = parse_doc_origin(j.at("origin").get<std::string>());
  auto format = parse_doc_format(j.at("format").get<std::string>());
  if (!origin || !format) throw ReportFormatError("bad document descriptor");
  d.origin = *origin;
  d.format = *format;
  d.path = j.at("path").get<std::string>();
  return d;
}

template <typename T>
std::optional<T> optional_value(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

std::optional<DurationStats> parse_stats(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  DurationStats s;
  s.count = j.at("count").get<std::size_t>();
  s.min = j.at("min").get<std::int64_t>();
  s.max = j.at("max").get<std::int64_t>();
  s.mean = j.at("mean").get<double>();
  s.median = j.at("median").get<double>();
  return s;
}

Aggregates parse_aggregates(const ojson& j) {
  Aggregates a;
  a.elements_total = j.at("elements_total").get<std::uint64_t>();
  a.elements_outdated = j.at("elements_outdated").get<std::uint64_t>();
  a.documents_total = j.at("documents_total").get<std::uint64_t>();
  a.documents_outdated = j.at("documents_outdated").get<std::uint64_t>();
  a.projects_total = j.at("projects_total").get<std::uint64_t>();
  a.projects_outdated = j.at("projects_outdated").get<std::uint64_t>();
  a.project_outdated = j.at("project_outdated").get<bool>();
  a.episodes_total = j.at("episodes_total").get<std::uint64_t>();
  a.episodes_ongoing = j.at("episodes_ongoing").get<std::uint64_t>();
  const auto& fixes = j.at("fix_kind_counts");
  a.fix_doc_delete = fixes.at("doc_delete").get<std::uint64_t>();
  a.fix_doc_update = fixes.at("doc_update").get<std::uint64_t>();
  a.fix_source_change = fixes.at("source_change").get<std::uint64_t>();
  a.reoutdated_count = j.at("reoutdated_count").get<std::uint64_t>();
  a.negative_durations = j.at("negative_durations").get<std::uint64_t>();
  a.fixed_durations = parse_stats(j.at("fixed_durations"));
  a.outdated_durations = parse_stats(j.at("outdated_durations"));
  for (const auto& p : j.at("survival")) {
    a.survival.push_back({p.at("duration").get<std::int64_t>(), p.at("surviving").get<double>()});
  }
  return a;
}

Finding parse_finding(const ojson& j) {
  Finding f;
  f.element = j.at("element").get<std::string>();
  f.document = parse_document(j.at("document"));
  f.document_commit = parse_commit(j, "document");
  f.document_url = j.at("document_url").get<std::string>();
  if (auto s = optional_value<std::string>(j.at("status"))) {
    f.status = parse_current_status(*s);
    if (!f.status) throw ReportFormatError("unknown status '" + *s + "'");
  }
  f.snapshot = parse_commit(j, "snapshot");
  f.snapshot_count = j.at("snapshot_count").get<std::uint64_t>();
  f.current = parse_commit(j, "current");
  f.current_count = j.at("current_count").get<std::uint64_t>();
  f.deletion = parse_commit(j, "deletion");
  for (const auto& e : j.at("evidence")) {
    f.evidence.push_back({e.at("path").get<std::string>(), e.at("line").get<std::size_t>(),
                          e.at("path_variant").get<bool>(), e.at("url").get<std::string>()});
  }
  f.timeline = optional_value<std::string>(j.at("timeline"));
  for (const auto& e : j.at("episodes")) {
    OutdatedEpisode ep;
    ep.element = f.element;
    ep.document = f.document;
    ep.start_ordinal = e.at("start_ordinal").get<std::size_t>();
    ep.start_sha = e.at("start_sha").get<std::string>();
    ep.start_timestamp = e.at("start_timestamp").get<std::int64_t>();
    ep.end_ordinal = optional_value<std::size_t>(e.at("end_ordinal"));
    if (const auto& fx = e.at("fix"); !fx.is_null()) {
      auto kind = parse_fix_kind(fx.at("kind").get<std::string>());
      if (!kind) throw ReportFormatError("unknown fix kind");
      ep.fix = FixEvent{*kind, fx.at("ordinal").get<std::size_t>(), fx.at("sha").get<std::string>(),
                        fx.at("timestamp").get<std::int64_t>()};
    }
    ep.duration_seconds = e.at("duration_seconds").get<std::int64_t>();
    f.episodes.push_back(std::move(ep));
  }
  return f;
}

// ---------------------------------------------------------------------------
// CSV / Markdown helpers

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void csv_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
}

std::string short_sha(std::string_view sha) { return std::string(sha.substr(0, 10)); }

std::string md_code(std::string_view text) {
  std::size_t longest = 0, run = 0;
  for (char c : text) {
    run = c == '`' ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  std::string fence(longest + 1, '`');
  bool pad = !text.empty() && (text.front() == '`' || text.back() == '`');
  return fence + (pad ? " " : "") + std::string(text) + (pad ? " " : "") + fence;
}

std::string md_link(std::string_view label, std::string_view url) {
  if (url.empty()) return std::string(label);
  return "[" + std::string(label) + "](" + std::string(url) + ")";
}

std::string evidence_label(const Evidence& e) {
  return e.path_variant || e.line == 0 ? e.path : e.path + ":" + std::to_string(e.line);
}

std::string fix_kinds(const Finding& f) {
  std::string out;
  for (const auto& ep : f.episodes) {
    if (!out.empty()) out += ';';
    out += ep.fix ? std::string(to_string(ep.fix->kind)) : "ongoing";
  }
  return out;
}

std::string render_csv(const ScanReport& r) {
  std::string out;
  csv_row(out, {"element", "document_origin", "document_path", "document_format", "status", "snapshot_sha",
                "snapshot_count", "current_sha", "current_count", "deletion_sha", "deletion_time", "evidence",
                "episodes", "fixes", "timeline"});
  for (const auto& f : r.findings) {
    std::string evidence;
    for (const auto& e : f.evidence) {
      if (!evidence.empty()) evidence += ';';
      evidence += evidence_label(e);
    }
    csv_row(out, {f.element, std::string(to_string(f.document.origin)), f.document.path,
                  std::string(to_string(f.document.format)), f.status ? std::string(to_string(*f.status)) : "",
                  f.snapshot ? f.snapshot->sha : "", f.snapshot ? std::to_string(f.snapshot_count) : "",
                  f.current ? f.current->sha : "", f.current ? std::to_string(f.current_count) : "",
                  f.deletion ? f.deletion->sha : "", f.deletion ? format_rfc3339(f.deletion->timestamp) : "",
                  evidence, std::to_string(f.episodes.size()), fix_kinds(f), f.timeline.value_or("")});
  }
  return out;
}

std::string format_days(std::int64_t seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f days", static_cast<double>(seconds) / 86400.0);
  return buf;
}

void render_aggregates_md(std::ostringstream& out, const Aggregates& a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "| elements | %llu | %llu | %.4f |\n",
                static_cast<unsigned long long>(a.elements_total),
                static_cast<unsigned long long>(a.elements_outdated), a.element_rate());
  out << "| level | total | outdated | rate |\n|---|---|---|---|\n" << buf;
  std::snprintf(buf, sizeof buf, "| documents | %llu | %llu | %.4f |\n",
                static_cast<unsigned long long>(a.documents_total),
                static_cast<unsigned long long>(a.documents_outdated), a.document_rate());
  out << buf;
  std::snprintf(buf, sizeof buf, "| projects | %llu | %llu | %.4f |\n",
                static_cast<unsigned long long>(a.projects_total),
                static_cast<unsigned long long>(a.projects_outdated), a.project_rate());
  out << buf << "\n";
  out << "- episodes: " << a.episodes_total << " (" << a.episodes_ongoing << " ongoing, " << a.reoutdated_count
      << " re-outdated)\n";
  out << "- fixes: doc-delete " << a.fix_doc_delete << ", doc-update " << a.fix_doc_update << ", source-change "
      << a.fix_source_change << "\n";
  if (a.negative_durations) out << "- negative durations: " << a.negative_durations << "\n";
  auto stats = [&](const char* label, const std::optional<DurationStats>& s) {
    if (!s) return;
    out << "- " << label << ": n=" << s->count << ", min " << format_days(s->min) << ", median "
        << format_days(static_cast<std::int64_t>(s->median)) << ", mean "
        << format_days(static_cast<std::int64_t>(s->mean)) << ", max " << format_days(s->max) << "\n";
  };
  stats("fixed durations", a.fixed_durations);
  stats("outdated durations", a.outdated_durations);
  if (!a.survival.empty()) {
    out << "\n| duration | surviving |\n|---|---|\n";
    for (const auto& p : a.survival) {
      std::snprintf(buf, sizeof buf, "| %s | %.4f |\n", format_days(p.duration).c_str(), p.surviving);
      out << buf;
    }
  }
}

std::string render_markdown(const ScanReport& r) {
  std::ostringstream out;
  out << "# Documentation report: " << (r.project.empty() ? "(unnamed)" : r.project) << "\n\n";
  out << "- mode: " << to_string(r.mode) << "\n";
  out << "- scan time: " << format_rfc3339(r.scan_time) << "\n";
  if (r.source_head) out << "- source head: `" << r.source_head->sha << "`\n";
  if (r.wiki_head) out << "- wiki head: `" << r.wiki_head->sha << "`\n";
  if (r.mode == ReportMode::History) {
    out << "- revisions analyzed: " << r.revisions.size() << " of " << r.revisions_total << "\n";
  }
  if (r.partial) out << "- partial: yes (timed out)\n";
  out << "\n## Findings (" << r.findings.size() << ")\n\n";
  if (r.findings.empty()) out << "No outdated references found.\n\n";
  for (const auto& f : r.findings) {
    out << "### " << md_code(f.element) << " in " << md_link(f.document.path, f.document_url) << " ("
        << to_string(f.document.origin) << ")\n\n";
    if (f.status) out << "- status: " << to_string(*f.status) << "\n";
    if (f.snapshot) {
      out << "- snapshot `" << short_sha(f.snapshot->sha) << "` (" << format_rfc3339(f.snapshot->timestamp)
          << "): " << f.snapshot_count << " instances\n";
    }
    if (f.current) {
      out << "- current `" << short_sha(f.current->sha) << "` (" << format_rfc3339(f.current->timestamp)
          << "): " << f.current_count << " instances\n";
    }
    if (f.deletion) {
      out << "- removed in `" << short_sha(f.deletion->sha) << "` (" << format_rfc3339(f.deletion->timestamp)
          << ")\n";
    }
    if (!f.evidence.empty()) {
      out << "- evidence:\n";
      for (const auto& e : f.evidence) {
        out << "  - " << md_link(evidence_label(e), e.url) << (e.path_variant ? " (file path)" : "") << "\n";
      }
    }
    if (f.timeline) out << "- timeline: `" << *f.timeline << "`\n";
    if (!f.episodes.empty()) {
      out << "\n| start | end | fix | duration |\n|---|---|---|---|\n";
      for (const auto& ep : f.episodes) {
        out << "| R" << ep.start_ordinal + 1 << " `" << short_sha(ep.start_sha) << "` | ";
        if (ep.fix) {
          out << "R" << ep.fix->ordinal + 1 << " `" << short_sha(ep.fix->sha) << "` | " << to_string(ep.fix->kind);
        } else {
          out << "- | ongoing";
        }
        out << " | " << format_days(ep.duration_seconds) << " |\n";
      }
    }
    out << "\n";
  }
  if (!r.warnings.empty()) {
    out << "## Warnings (" << r.warnings.size() << ")\n\n";
    for (const auto& w : r.warnings) {
      out << "- " << w.kind << ": " << (w.path.empty() ? "" : w.path + ": ") << w.message << "\n";
    }
    out << "\n";
  }
  out << "## Aggregates\n\n";
  render_aggregates_md(out, r.aggregates);
  return out.str();
}

}  // namespace

std::string render_findings(const ScanReport& report, OutputFormat format) {
  switch (format) {
    case OutputFormat::Json: return report_json(report).dump(2) + "\n";
    case OutputFormat::Csv: return render_csv(report);
    case OutputFormat::Markdown: return render_markdown(report);
  }
  return {};
}

ScanReport parse_report_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::exception& e) {
    throw ReportFormatError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("schema_version")) throw ReportFormatError("missing schema_version");
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw ReportFormatError("unsupported schema_version " + j.at("schema_version").dump());
    }
    ScanReport r;
    r.project = j.at("project").get<std::string>();
    auto scan_time = parse_rfc3339(j.at("scan_time").get<std::string>());
    if (!scan_time) throw ReportFormatError("bad scan_time");
    r.scan_time = *scan_time;
    auto mode = parse_report_mode(j.at("mode").get<std::string>());
    if (!mode) throw ReportFormatError("bad mode");
    r.mode = *mode;
    r.partial = j.at("partial").get<bool>();
    r.source_head = parse_commit(j, "source_head");
    r.wiki_head = parse_commit(j, "wiki_head");
    r.revisions_total = j.at("revisions_total").get<std::size_t>();
    for (const auto& rev : j.at("revisions")) {
      r.revisions.push_back({rev.at("sha").get<std::string>(), rev.at("timestamp").get<std::int64_t>(),
                             rev.at("ordinal").get<std::size_t>()});
    }
    for (const auto& f : j.at("findings")) r.findings.push_back(parse_finding(f));
    for (const auto& t : j.at("timelines")) {
      ElementTimeline tl;
      tl.element = t.at("element").get<std::string>();
      tl.document = parse_document(t.at("document"));
      tl.symbols = parse_symbols(t.at("symbols").get<std::string>());
      tl.failed_ordinal = optional_value<std::size_t>(t.at("failed_ordinal"));
      r.timelines.push_back(std::move(tl));
    }
    for (const auto& w : j.at("warnings")) {
      r.warnings.push_back({w.at("kind").get<std::string>(), w.at("path").get<std::string>(),
                            w.at("object").get<std::string>(), w.at("message").get<std::string>()});
    }
    r.aggregates = parse_aggregates(j.at("aggregates"));
    return r;
  } catch (const ojson::exception& e) {
    throw ReportFormatError(std::string("schema mismatch: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ReportFormatError(std::string("schema mismatch: ") + e.what());
  }
}

std::string render_aggregates_json(const Aggregates& aggregates) { return aggregates_json(aggregates).dump(2) + "\n"; }

std::string render_aggregates_markdown(const Aggregates& aggregates) {
  std::ostringstream out;
  out << "# Aggregates\n\n";
  render_aggregates_md(out, aggregates);
  return out.str();
}

// ---------------------------------------------------------------------------
// History table

std::string render_history_table(std::span<const ElementTimeline> timelines, std::span<const Revision> revisions,
                                 TableFormat format, std::size_t first, std::optional<std::size_t> last) {
  for (const auto& t : timelines) {
    const std::size_t expected = t.failed_ordinal ? *t.failed_ordinal : revisions.size();
    if (t.symbols.size() != expected || expected > revisions.size()) {
      throw std::logic_error("render_history_table: timeline for '" + t.element + "' is not aligned with the " +
                             std::to_string(revisions.size()) + "-revision sequence");
    }
  }
  const std::size_t end = std::min(last.value_or(revisions.size()), revisions.size());
  if (first > end) throw std::out_of_range("render_history_table: empty or inverted column range");
  const std::size_t columns = end - first;
  if (format == TableFormat::Csv && columns > kMaxCsvRevisionColumns) {
    throw TableTooWide("history table has " + std::to_string(columns) + " revision columns; CSV is limited to " +
                       std::to_string(kMaxCsvRevisionColumns));
  }

  auto label = [&](std::size_t i) { return "R" + std::to_string(revisions[i].ordinal + 1); };
  auto cell = [](const ElementTimeline& t, std::size_t i) {
    return i < t.symbols.size() ? t.symbols[i].to_string() : std::string("?");
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"element", "document"};
  for (std::size_t i = first; i < end; ++i) header.push_back(label(i));
  rows.push_back(std::move(header));
  for (const auto& t : timelines) {
    std::vector<std::string> row{t.element, std::string(to_string(t.document.origin)) + ":" + t.document.path};
    for (std::size_t i = first; i < end; ++i) row.push_back(cell(t, i));
    rows.push_back(std::move(row));
  }

  std::string out;
  if (format == TableFormat::Csv) {
    std::vector<std::string> shas{"#sha", ""}, times{"#timestamp", ""};
    for (std::size_t i = first; i < end; ++i) {
      shas.push_back(revisions[i].sha);
      times.push_back(format_rfc3339(revisions[i].timestamp));
    }
    csv_row(out, shas);
    csv_row(out, times);
    for (const auto& row : rows) csv_row(out, row);
    return out;
  }

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      if (c < 2) {
        line += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        line += std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Issue draft

std::string render_issue_draft(const ScanReport& report) {
  std::vector<const Finding*> outdated;
  for (const auto& f : report.findings) {
    if (f.currently_outdated()) outdated.push_back(&f);
  }
  if (outdated.empty()) throw std::invalid_argument("no outdated references to report");

  std::ostringstream out;
  out << "## Outdated code references in the documentation\n\n";
  out << "The documentation" << (report.project.empty() ? "" : " of " + report.project)
      << " mentions code elements that no longer appear anywhere in the source code";
  if (report.source_head) out << " as of `" << short_sha(report.source_head->sha) << "`";
  out << ". Each entry below links the document and a file where the element last existed.\n\n";
  for (const Finding* f : outdated) {
    out << "- " << md_code(f->element) << " in " << md_link(f->document.path, f->document_url) << "\n";
    if (!f->evidence.empty()) {
      const auto& e = f->evidence.front();
      out << "  - last present";
      if (f->snapshot) out << " at `" << short_sha(f->snapshot->sha) << "`";
      out << " in " << md_link(evidence_label(e), e.url) << "\n";
    }
    if (f->deletion) {
      out << "  - removed in `" << short_sha(f->deletion->sha) << "` (" << format_rfc3339(f->deletion->timestamp)
          << ")\n";
    } else {
      for (auto it = f->episodes.rbegin(); it != f->episodes.rend(); ++it) {
        if (!it->ongoing()) continue;
        out << "  - removed in `" << short_sha(it->start_sha) << "` (" << format_rfc3339(it->start_timestamp)
            << ")\n";
        break;
      }
    }
  }
  return out.str();
}

}  // namespace staledoc
