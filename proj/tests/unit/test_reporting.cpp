#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "staledoc/reporting.hpp"

namespace staledoc {
namespace {

const DocumentDescriptor kReadme{DocOrigin::Readme, "README.md", DocFormat::Markdown};
const DocumentDescriptor kWikiPage{DocOrigin::Wiki, "Installing-Glog-on-Ubuntu-14.04.md", DocFormat::Markdown};

std::string sha_of(char c) { return std::string(40, c); }

Finding outdated_finding(std::string element, DocumentDescriptor doc, std::uint64_t snapshot_count) {
  Finding f;
  f.element = std::move(element);
  f.document = std::move(doc);
  f.document_commit = CommitRef{sha_of('d'), 1500};
  f.status = CurrentStatus::Outdated;
  f.snapshot = CommitRef{sha_of('a'), 1000};
  f.snapshot_count = snapshot_count;
  f.current = CommitRef{sha_of('c'), 3000};
  f.current_count = 0;
  f.deletion = CommitRef{sha_of('b'), 2000};
  f.evidence.push_back({"m4/libtool.m4", 3905, false, "https://github.com/o/r/blob/aaa/m4/libtool.m4#L3905"});
  return f;
}

OutdatedEpisode episode(std::size_t start, std::optional<std::size_t> end, std::optional<FixKind> kind,
                        std::int64_t duration) {
  OutdatedEpisode e;
  e.element = "x";
  e.start_ordinal = start;
  e.end_ordinal = end;
  if (kind) e.fix = FixEvent{*kind, *end, sha_of('e'), 100 + duration};
  e.start_sha = sha_of('s');
  e.start_timestamp = 100;
  e.duration_seconds = duration;
  return e;
}

TEST(Aggregates, ElementDocumentProjectRates) {
  std::vector<Finding> findings{outdated_finding("a", kReadme, 1), outdated_finding("b", kReadme, 2)};
  auto a = compute_aggregates(findings, 10, 3, 5000);
  EXPECT_DOUBLE_EQ(a.element_rate(), 0.2);
  EXPECT_DOUBLE_EQ(a.document_rate(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.project_rate(), 1.0);
  EXPECT_TRUE(a.project_outdated);
  ASSERT_TRUE(a.outdated_durations);
  EXPECT_EQ(a.outdated_durations->min, 3000);
}

TEST(Aggregates, ProjectRateOverCorpus) {
  ScanReport one, two;
  one.project = "p1";
  one.findings = {outdated_finding("a", kReadme, 1)};
  one.aggregates = compute_aggregates(one.findings, 4, 1, 5000);
  two.project = "p2";
  two.aggregates = compute_aggregates(two.findings, 6, 2, 5000);
  std::vector<ScanReport> corpus{one, two};
  auto a = aggregate_corpus(corpus);
  EXPECT_EQ(a.projects_total, 2u);
  EXPECT_EQ(a.projects_outdated, 1u);
  EXPECT_DOUBLE_EQ(a.project_rate(), 0.5);
  EXPECT_DOUBLE_EQ(a.element_rate(), 0.1);
  EXPECT_DOUBLE_EQ(a.document_rate(), 1.0 / 3.0);
}

TEST(Aggregates, FixKindCounts) {
  Finding f;
  f.element = "x";
  f.document = kReadme;
  f.episodes = {episode(1, 2, FixKind::SourceChange, 10), episode(3, 4, FixKind::SourceChange, 20),
                episode(5, 6, FixKind::DocUpdate, 30)};
  Finding g;
  g.element = "y";
  g.document = kWikiPage;
  g.episodes = {episode(1, 2, FixKind::DocDelete, -5), episode(4, std::nullopt, std::nullopt, 70)};
  ScanReport r;
  r.mode = ReportMode::History;
  r.findings = {f, g};
  r.aggregates = compute_aggregates(r.findings, 2, 2, 1000);
  std::vector<ScanReport> corpus{r};
  auto a = aggregate_corpus(corpus);
  EXPECT_EQ(a.fix_source_change, 2u);
  EXPECT_EQ(a.fix_doc_update, 1u);
  EXPECT_EQ(a.fix_doc_delete, 1u);
  EXPECT_EQ(a.episodes_total, 5u);
  EXPECT_EQ(a.episodes_ongoing, 1u);
  EXPECT_EQ(a.reoutdated_count, 3u);
  EXPECT_EQ(a.negative_durations, 1u);
  ASSERT_TRUE(a.fixed_durations);
  EXPECT_EQ(a.fixed_durations->count, 3u);
  EXPECT_DOUBLE_EQ(a.fixed_durations->median, 20.0);
  ASSERT_FALSE(a.survival.empty());
  EXPECT_DOUBLE_EQ(a.survival.front().surviving, 1.0);
  EXPECT_EQ(a, r.aggregates);
}

TEST(Aggregates, DurationStats) {
  std::vector<std::int64_t> d{4, 1, 3, 2};
  auto s = duration_stats(d);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->min, 1);
  EXPECT_EQ(s->max, 4);
  EXPECT_DOUBLE_EQ(s->mean, 2.5);
  EXPECT_DOUBLE_EQ(s->median, 2.5);
  EXPECT_FALSE(duration_stats({}));
}

TEST(Aggregates, LevelInvariants) {
  std::vector<Finding> findings{outdated_finding("a", kReadme, 1), outdated_finding("b", kWikiPage, 1)};
  auto a = compute_aggregates(findings, 5, 2, 0);
  EXPECT_LE(a.elements_outdated, a.elements_total);
  EXPECT_LE(a.documents_outdated, a.documents_total);
  EXPECT_EQ(a.documents_outdated, 2u);
  auto none = compute_aggregates({}, 5, 2, 0);
  EXPECT_FALSE(none.project_outdated);
  EXPECT_DOUBLE_EQ(none.project_rate(), 0.0);
}

TEST(Findings, SortedByDocumentThenElement) {
  std::vector<Finding> f{outdated_finding("b", kWikiPage, 1), outdated_finding("z", kReadme, 1),
                         outdated_finding("a", kReadme, 1)};
  sort_findings(f);
  EXPECT_EQ(f[0].element, "a");
  EXPECT_EQ(f[1].element, "z");
  EXPECT_EQ(f[2].element, "b");
}

ScanReport glog_report() {
  ScanReport r;
  r.project = "google/glog";
  r.scan_time = 4000;
  r.source_head = CommitRef{sha_of('c'), 3000};
  r.wiki_head = CommitRef{sha_of('d'), 1500};
  r.findings = {outdated_finding("DGFLAGS_NAMESPACE", kWikiPage, 1), outdated_finding("fPIC", kWikiPage, 21)};
  r.aggregates = compute_aggregates(r.findings, 2, 1, r.scan_time);
  return r;
}

TEST(Json, GlogFindingFields) {
  auto j = nlohmann::json::parse(render_findings(glog_report(), OutputFormat::Json));
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["mode"], "current");
  EXPECT_EQ(j["scan_time"], "1970-01-01T01:06:40Z");
  ASSERT_EQ(j["findings"].size(), 2u);
  const auto& f = j["findings"][1];
  EXPECT_EQ(f["element"], "fPIC");
  EXPECT_EQ(f["snapshot_count"], 21);
  EXPECT_EQ(f["current_count"], 0);
  EXPECT_EQ(f["status"], "outdated");
  EXPECT_EQ(f["snapshot_sha"], sha_of('a'));
  EXPECT_EQ(f["deletion_sha"], sha_of('b'));
  EXPECT_EQ(f["document"]["origin"], "wiki");
}

TEST(Json, EmptyFindings) {
  ScanReport r;
  auto j = nlohmann::json::parse(render_findings(r, OutputFormat::Json));
  EXPECT_TRUE(j["findings"].is_array());
  EXPECT_TRUE(j["findings"].empty());
}

TEST(Json, PathVariantEvidence) {
  ScanReport r;
  Finding f = outdated_finding("file.py", kReadme, 1);
  f.evidence = {{"path/to/file.py", 0, true, ""}};
  r.findings = {f};
  auto j = nlohmann::json::parse(render_findings(r, OutputFormat::Json));
  const auto& e = j["findings"][0]["evidence"][0];
  EXPECT_EQ(e["line"], 0);
  EXPECT_EQ(e["path_variant"], true);
}

TEST(Json, SchemaMismatchRejected) {
  auto text = render_findings(glog_report(), OutputFormat::Json);
  auto j = nlohmann::json::parse(text);
  j["schema_version"] = 2;
  EXPECT_THROW(parse_report_json(j.dump()), ReportFormatError);
  EXPECT_THROW(parse_report_json("{not json"), ReportFormatError);
  EXPECT_THROW(parse_report_json("[]"), ReportFormatError);
}

ScanReport random_report(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(0, 4);
  std::uniform_int_distribution<std::int64_t> ts(0, 2'000'000'000);
  std::bernoulli_distribution coin;
  ScanReport r;
  r.project = coin(rng) ? "owner/repo" : "local \"dir\", with comma";
  r.scan_time = ts(rng);
  r.mode = coin(rng) ? ReportMode::History : ReportMode::Current;
  r.partial = coin(rng);
  if (coin(rng)) r.source_head = CommitRef{sha_of('1'), ts(rng)};
  if (coin(rng)) r.wiki_head = CommitRef{sha_of('2'), ts(rng)};
  const std::size_t nrev = static_cast<std::size_t>(small(rng)) + 1;
  r.revisions_total = nrev + static_cast<std::size_t>(small(rng));
  for (std::size_t i = 0; i < nrev; ++i) {
    r.revisions.push_back({sha_of(static_cast<char>('a' + i % 6)), ts(rng), r.revisions_total - nrev + i});
  }
  for (int k = small(rng); k > 0; --k) {
    Finding f;
    f.element = "elem" + std::to_string(k) + (coin(rng) ? "('./x')" : "");
    f.document = coin(rng) ? kReadme : kWikiPage;
    if (coin(rng)) f.document_commit = CommitRef{sha_of('9'), ts(rng)};
    f.document_url = coin(rng) ? "" : "https://example.invalid/doc";
    if (r.mode == ReportMode::Current) {
      f.status = static_cast<CurrentStatus>(small(rng) % 3);
      f.snapshot = CommitRef{sha_of('3'), ts(rng)};
      f.snapshot_count = static_cast<std::uint64_t>(small(rng));
      f.current = CommitRef{sha_of('4'), ts(rng)};
      if (coin(rng)) f.deletion = CommitRef{sha_of('5'), ts(rng)};
      for (int e = small(rng); e > 0; --e) {
        f.evidence.push_back({"src/f" + std::to_string(e) + ".c", static_cast<std::size_t>(small(rng)), coin(rng),
                              coin(rng) ? "" : "https://u"});
      }
    } else {
      f.timeline = "1 0 - 0";
      for (int e = small(rng); e > 0; --e) {
        auto kind = static_cast<FixKind>(small(rng) % 3);
        auto ep = coin(rng) ? episode(1, 2, kind, small(rng) - 2) : episode(3, std::nullopt, std::nullopt, 9);
        ep.element = f.element;
        ep.document = f.document;
        f.episodes.push_back(ep);
      }
    }
    r.findings.push_back(std::move(f));
  }
  sort_findings(r.findings);
  if (r.mode == ReportMode::History) {
    ElementTimeline t{"elem", kReadme, {}, std::nullopt};
    for (std::size_t i = 0; i < r.revisions.size(); ++i) t.symbols.push_back(TimelineSymbol::count(i));
    if (coin(rng)) t.failed_ordinal = r.revisions.size();
    r.timelines.push_back(t);
  }
  if (coin(rng)) r.warnings.push_back({"oversize-file", "big.bin", sha_of('7'), "skipped"});
  r.aggregates = compute_aggregates(r.findings, 10, 3, r.scan_time);
  return r;
}

TEST(JsonProperty, RoundTripIsLossless) {
  std::mt19937_64 rng(31337);
  for (int iter = 0; iter < 300; ++iter) {
    auto r = random_report(rng);
    auto text = render_findings(r, OutputFormat::Json);
    auto parsed = parse_report_json(text);
    ASSERT_EQ(parsed, r) << text;
    EXPECT_EQ(render_findings(parsed, OutputFormat::Json), text);
  }
}

TEST(JsonProperty, AggregatesRecomputedFromSerializedFindings) {
  std::mt19937_64 rng(8080);
  for (int iter = 0; iter < 300; ++iter) {
    auto r = random_report(rng);
    auto parsed = parse_report_json(render_findings(r, OutputFormat::Json));
    auto recomputed = compute_aggregates(parsed.findings, parsed.aggregates.elements_total,
                                         parsed.aggregates.documents_total, parsed.scan_time);
    EXPECT_EQ(recomputed, r.aggregates);
  }
}

TEST(Csv, HeaderAndQuoting) {
  ScanReport empty;
  auto header_only = render_findings(empty, OutputFormat::Csv);
  EXPECT_EQ(std::count(header_only.begin(), header_only.end(), '\n'), 1);
  EXPECT_EQ(header_only.rfind("element,document_origin,document_path", 0), 0u);

  ScanReport r = glog_report();
  r.findings[0].element = "a,\"b\"";
  auto csv = render_findings(r, OutputFormat::Csv);
  EXPECT_NE(csv.find("\"a,\"\"b\"\"\""), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Markdown, ListsFindingsWithLinks) {
  auto md = render_findings(glog_report(), OutputFormat::Markdown);
  EXPECT_NE(md.find("`fPIC`"), std::string::npos);
  EXPECT_NE(md.find("`DGFLAGS_NAMESPACE`"), std::string::npos);
  EXPECT_NE(md.find("https://github.com/o/r/blob/aaa/m4/libtool.m4#L3905"), std::string::npos);
}

TEST(IssueDraft, GlogFindings) {
  auto r = glog_report();
  r.findings[0].document_url = "https://github.com/google/glog/wiki/Installing-Glog-on-Ubuntu-14.04/ddd";
  auto draft = render_issue_draft(r);
  EXPECT_NE(draft.find("- `DGFLAGS_NAMESPACE` in [Installing-Glog-on-Ubuntu-14.04.md]("), std::string::npos);
  EXPECT_NE(draft.find("- `fPIC` in"), std::string::npos);
  EXPECT_NE(draft.find("m4/libtool.m4:3905"), std::string::npos);
  EXPECT_NE(draft.find("removed in `bbbbbbbbbb`"), std::string::npos);
}

TEST(IssueDraft, SingleFindingOneBullet) {
  auto r = glog_report();
  r.findings.pop_back();
  auto draft = render_issue_draft(r);
  std::size_t bullets = 0;
  std::istringstream in(draft);
  for (std::string line; std::getline(in, line);) bullets += line.rfind("- ", 0) == 0 ? 1 : 0;
  EXPECT_EQ(bullets, 1u);
}

TEST(IssueDraft, PathVariantLinksFile) {
  auto r = glog_report();
  r.findings.resize(1);
  r.findings[0].evidence = {{"path/to/file.py", 0, true, "https://github.com/o/r/blob/aaa/path/to/file.py"}};
  auto draft = render_issue_draft(r);
  EXPECT_NE(draft.find("[path/to/file.py](https://github.com/o/r/blob/aaa/path/to/file.py)"), std::string::npos);
  EXPECT_EQ(draft.find("#L"), std::string::npos);
}

TEST(IssueDraft, NothingOutdatedIsError) {
  ScanReport r;
  EXPECT_THROW(render_issue_draft(r), std::invalid_argument);
}

std::vector<Revision> revisions(std::size_t n) {
  std::vector<Revision> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({sha_of(static_cast<char>('a' + i % 6)), 1000 + static_cast<std::int64_t>(i), i});
  return out;
}

TEST(Table, CellsEqualSymbols) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> sym(-2, 250);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + static_cast<std::size_t>(iter % 9);
    auto revs = revisions(n);
    std::vector<ElementTimeline> tls;
    for (int e = 0; e < 3; ++e) {
      ElementTimeline t{"el" + std::to_string(e), kReadme, {}, std::nullopt};
      for (std::size_t i = 0; i < n; ++i) {
        int v = sym(rng);
        t.symbols.push_back(v == -2   ? TimelineSymbol::doc_absent()
                            : v == -1 ? TimelineSymbol::no_reference()
                                      : TimelineSymbol::count(static_cast<std::uint64_t>(v)));
      }
      tls.push_back(t);
    }
    auto csv = render_history_table(tls, revs, TableFormat::Csv);
    std::istringstream in(csv);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
      rows.push_back(cells);
    }
    ASSERT_EQ(rows.size(), 3u + tls.size());
    EXPECT_EQ(rows[0][0], "#sha");
    EXPECT_EQ(rows[2][2], "R1");
    for (std::size_t e = 0; e < tls.size(); ++e) {
      ASSERT_EQ(rows[3 + e].size(), n + 2);
      for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(rows[3 + e][2 + i], tls[e].symbols[i].to_string());
    }
    auto text = render_history_table(tls, revs, TableFormat::Text);
    std::istringstream tin(text);
    std::string line;
    std::getline(tin, line);
    for (const auto& t : tls) {
      std::getline(tin, line);
      std::istringstream ws(line);
      std::vector<std::string> words;
      for (std::string w; ws >> w;) words.push_back(w);
      ASSERT_EQ(words.size(), n + 2);
      for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(words[2 + i], t.symbols[i].to_string());
    }
  }
}

TEST(Table, ColumnRangeAndHeaderOnly) {
  auto revs = revisions(7);
  ElementTimeline t{"renderFiles('./files')", kReadme, parse_symbols("3 3 0 0 0 0 -"), std::nullopt};
  std::vector<ElementTimeline> tls{t};
  auto text = render_history_table(tls, revs, TableFormat::Text, 2, 5);
  EXPECT_NE(text.find("R3  R4  R5"), std::string::npos);
  EXPECT_NE(text.find("renderFiles('./files')  readme:README.md   0   0   0"), std::string::npos);
  auto empty = render_history_table({}, revs, TableFormat::Text);
  EXPECT_EQ(std::count(empty.begin(), empty.end(), '\n'), 1);
}

TEST(Table, MisalignedTimelineRejected) {
  auto revs = revisions(3);
  ElementTimeline t{"x", kReadme, parse_symbols("1 0"), std::nullopt};
  std::vector<ElementTimeline> tls{t};
  EXPECT_THROW(render_history_table(tls, revs, TableFormat::Text), std::logic_error);
  tls[0].failed_ordinal = 2;
  EXPECT_NO_THROW(render_history_table(tls, revs, TableFormat::Text));
}

TEST(Table, CsvWidthLimit) {
  auto revs = revisions(kMaxCsvRevisionColumns + 1);
  EXPECT_THROW(render_history_table({}, revs, TableFormat::Csv), TableTooWide);
  EXPECT_NO_THROW(render_history_table({}, revs, TableFormat::Text));
}

TEST(Time, Rfc3339) {
  EXPECT_EQ(format_rfc3339(0), "1970-01-01T00:00:00Z");
  EXPECT_EQ(parse_rfc3339("2020-09-13T12:26:40Z"), 1600000000);
  EXPECT_EQ(parse_rfc3339("2020-09-13T14:26:40+02:00"), 1600000000);
  EXPECT_EQ(parse_rfc3339("2020-09-13T12:26:40.75Z"), 1600000000);
  EXPECT_FALSE(parse_rfc3339("yesterday"));
  EXPECT_FALSE(parse_rfc3339("2020-13-01T00:00:00Z"));
}

TEST(Urls, Templates) {
  UrlTemplates u{"https://github.com/o/r"};
  EXPECT_EQ(u.source_url("abc", "src/a.c", 12), "https://github.com/o/r/blob/abc/src/a.c#L12");
  EXPECT_EQ(u.source_url("abc", "src/a.c", 0), "https://github.com/o/r/blob/abc/src/a.c");
  EXPECT_EQ(u.document_url(kReadme, "abc"), "https://github.com/o/r/blob/abc/README.md");
  EXPECT_EQ(u.document_url(kWikiPage, "def"), "https://github.com/o/r/wiki/Installing-Glog-on-Ubuntu-14.04/def");
  UrlTemplates off;
  EXPECT_EQ(off.source_url("abc", "a", 1), "");
}

TEST(Urls, GithubRemotes) {
  EXPECT_EQ(github_base_from_remote("https://github.com/google/glog.git"), "https://github.com/google/glog");
  EXPECT_EQ(github_base_from_remote("git@github.com:vuejs/vue-cli.git"), "https://github.com/vuejs/vue-cli");
  EXPECT_EQ(github_base_from_remote("ssh://git@github.com/a/b"), "https://github.com/a/b");
  EXPECT_FALSE(github_base_from_remote("https://gitlab.com/a/b.git"));
  EXPECT_FALSE(github_base_from_remote("/local/path"));
}

TEST(Formats, Parse) {
  EXPECT_EQ(parse_output_format("json"), OutputFormat::Json);
  EXPECT_EQ(parse_output_format("csv"), OutputFormat::Csv);
  EXPECT_EQ(parse_output_format("md"), OutputFormat::Markdown);
  EXPECT_EQ(parse_output_format("markdown"), OutputFormat::Markdown);
  EXPECT_FALSE(parse_output_format("xml"));
  EXPECT_EQ(parse_report_mode(to_string(ReportMode::History)), ReportMode::History);
}

}  // namespace
}  // namespace staledoc
