#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "staledoc/timeline.hpp"

namespace staledoc {
namespace {

using testing::kDash;
using testing::kDot;
using testing::OracleFix;
using testing::OracleSymbol;

RevisionSequence seq_of(std::size_t n, std::int64_t t0 = 1000, std::int64_t step = 100) {
  std::vector<std::pair<std::string, std::int64_t>> commits;
  for (std::size_t i = 0; i < n; ++i) {
    std::string sha = std::to_string(i);
    sha = std::string(40 - sha.size(), '0') + sha;
    commits.emplace_back(sha, t0 + static_cast<std::int64_t>(i) * step);
  }
  return make_sequence(RepoKind::Source, std::move(commits));
}

ElementTimeline tl(std::string_view symbols) {
  return {"elem", {DocOrigin::Readme, "README.md", DocFormat::Markdown}, parse_symbols(symbols), std::nullopt};
}

std::vector<TimelineSymbol> from_oracle(const std::vector<OracleSymbol>& s) {
  std::vector<TimelineSymbol> out;
  for (int v : s) {
    out.push_back(v == kDot    ? TimelineSymbol::doc_absent()
                  : v == kDash ? TimelineSymbol::no_reference()
                               : TimelineSymbol::count(static_cast<std::uint64_t>(v)));
  }
  return out;
}

FixKind to_kind(OracleFix f) {
  switch (f) {
    case OracleFix::DocDelete: return FixKind::DocDelete;
    case OracleFix::DocUpdate: return FixKind::DocUpdate;
    case OracleFix::SourceChange: return FixKind::SourceChange;
  }
  return FixKind::DocUpdate;
}

TEST(Symbols, RenderAndParse) {
  auto s = parse_symbols("3 3 0 0 . -");
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s[0], TimelineSymbol::count(3));
  EXPECT_TRUE(s[2].is_zero());
  EXPECT_TRUE(s[4].is_absent());
  EXPECT_TRUE(s[5].is_no_reference());
  EXPECT_EQ(render_symbols(s), "3 3 0 0 . -");
  EXPECT_TRUE(parse_symbols("").empty());
  EXPECT_THROW(parse_symbols("3 x"), std::invalid_argument);
  EXPECT_THROW(parse_symbols("-1"), std::invalid_argument);
  EXPECT_EQ(TimelineSymbol::parse("12"), TimelineSymbol::count(12));
  EXPECT_FALSE(TimelineSymbol::parse(""));
}

TEST(FixKinds, Names) {
  for (auto k : {FixKind::DocDelete, FixKind::DocUpdate, FixKind::SourceChange}) {
    EXPECT_EQ(parse_fix_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_fix_kind("other"));
}

TEST(Build, SymbolPerLink) {
  auto source = seq_of(5);
  DocumentDescriptor doc{DocOrigin::Readme, "README.md", DocFormat::Markdown};
  std::vector<DocVersion> versions(5);
  const std::vector<int> plan{kDot, kDash, 2, 0, kDash};
  for (std::size_t i = 0; i < 5; ++i) {
    versions[i].descriptor = doc;
    versions[i].revision = source[i];
    versions[i].present = plan[i] != kDot;
    versions[i].text = std::make_shared<const std::string>(plan[i] >= 0 ? "ref" : "none");
  }
  auto links = link_same_repository(source, versions);
  auto refs = [](const DocVersion& v) { return *v.text == "ref"; };
  auto counts = [&](const Revision& r) -> std::optional<std::uint64_t> {
    return static_cast<std::uint64_t>(plan[r.ordinal]);
  };
  auto t = build_timeline("elem", doc, links, versions, refs, counts);
  EXPECT_EQ(render_symbols(t.symbols), ". - 2 0 -");
  EXPECT_FALSE(t.partial());
}

TEST(Build, NeverReferenced) {
  auto source = seq_of(3);
  std::vector<DocVersion> versions(3);
  for (std::size_t i = 0; i < 3; ++i) {
    versions[i].revision = source[i];
    versions[i].present = i > 0;
  }
  auto links = link_same_repository(source, versions);
  auto t = build_timeline("e", {}, links, versions, [](const DocVersion&) { return false; },
                          [](const Revision&) -> std::optional<std::uint64_t> { return 7; });
  EXPECT_EQ(render_symbols(t.symbols), ". - -");
}

TEST(Build, SingleCommit) {
  auto source = seq_of(1);
  std::vector<DocVersion> versions(1);
  versions[0].revision = source[0];
  versions[0].present = true;
  auto links = link_same_repository(source, versions);
  auto t = build_timeline("e", {}, links, versions, [](const DocVersion&) { return true; },
                          [](const Revision&) -> std::optional<std::uint64_t> { return 1; });
  EXPECT_EQ(render_symbols(t.symbols), "1");
}

TEST(Build, NoVersionsIsAllAbsent) {
  auto source = seq_of(3);
  auto links = link_source_to_docs(source, {});
  auto t = build_timeline("e", {}, links, {}, [](const DocVersion&) { return true; },
                          [](const Revision&) -> std::optional<std::uint64_t> { return 1; });
  EXPECT_EQ(render_symbols(t.symbols), ". . .");
}

TEST(Build, CountFailureMarksPartial) {
  auto source = seq_of(4);
  std::vector<DocVersion> versions(4);
  for (std::size_t i = 0; i < 4; ++i) {
    versions[i].revision = source[i];
    versions[i].present = true;
  }
  auto links = link_same_repository(source, versions);
  auto t = build_timeline("e", {}, links, versions, [](const DocVersion&) { return true; },
                          [](const Revision& r) -> std::optional<std::uint64_t> {
                            if (r.ordinal == 2) return std::nullopt;
                            return 1;
                          });
  EXPECT_TRUE(t.partial());
  EXPECT_EQ(*t.failed_ordinal, 2u);
  EXPECT_EQ(render_symbols(t.symbols), "1 1");
}

TEST(Episodes, DocAbsentInteriorMerges) {
  auto eps = detect_episodes(tl("2 0 0 . 0 0 0"));
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_EQ(eps[0].start_ordinal, 1u);
  EXPECT_TRUE(eps[0].ongoing());
}

TEST(Episodes, RenderFilesRow) {
  auto t = tl("3 3 0 0 0 0 -");
  auto source = seq_of(7);
  auto eps = analyze_timeline(t, source, 99999);
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_EQ(eps[0].start_ordinal, 2u);
  EXPECT_EQ(eps[0].end_ordinal, 6u);
  ASSERT_TRUE(eps[0].fix);
  EXPECT_EQ(eps[0].fix->kind, FixKind::DocUpdate);
  EXPECT_EQ(eps[0].fix->sha, source[6].sha);
  EXPECT_EQ(eps[0].fix->timestamp, source[6].timestamp);
  EXPECT_EQ(eps[0].start_sha, source[2].sha);
  EXPECT_EQ(eps[0].duration_seconds, 400);
}

TEST(Episodes, NeverZero) { EXPECT_TRUE(detect_episodes(tl("- - 1 2 2")).empty()); }

TEST(Episodes, ZeroWithoutEarlierPositive) { EXPECT_TRUE(detect_episodes(tl("0 0 - 0 . 1")).empty()); }

TEST(Episodes, ReoutdatedTwice) {
  auto source = seq_of(5);
  auto eps = analyze_timeline(tl("1 0 2 0 -"), source, 0);
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_EQ(eps[0].start_ordinal, 1u);
  EXPECT_EQ(eps[0].fix->kind, FixKind::SourceChange);
  EXPECT_EQ(eps[0].fix->ordinal, 2u);
  EXPECT_EQ(eps[1].start_ordinal, 3u);
  EXPECT_EQ(eps[1].fix->kind, FixKind::DocUpdate);
  EXPECT_EQ(eps[1].fix->ordinal, 4u);
}

TEST(Episodes, FixKindMapping) {
  auto source = seq_of(3);
  const std::vector<std::pair<std::string, FixKind>> cases{
      {"1 0 -", FixKind::DocUpdate}, {"1 0 .", FixKind::DocDelete}, {"1 0 7", FixKind::SourceChange}};
  for (const auto& [symbols, kind] : cases) {
    auto t = tl(symbols);
    auto eps = detect_episodes(t);
    ASSERT_EQ(eps.size(), 1u) << symbols;
    auto fix = classify_fix(t, eps[0], source);
    EXPECT_EQ(fix.kind, kind) << symbols;
    EXPECT_EQ(fix.ordinal, 2u);
    EXPECT_EQ(fix.sha, source[2].sha);
  }
}

TEST(Episodes, DocAbsentThenDashIsDelete) {
  auto source = seq_of(4);
  auto eps = analyze_timeline(tl("1 0 . -"), source, 0);
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_EQ(eps[0].fix->kind, FixKind::DocDelete);
  EXPECT_EQ(eps[0].fix->ordinal, 2u);
}

TEST(Episodes, DashStartsNewContextLiteral) {
  auto eps = detect_episodes(tl("3 0 - 0"));
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_EQ(eps[1].start_ordinal, 3u);
  EXPECT_TRUE(eps[1].ongoing());
}

TEST(Episodes, StrictRuleNeedsPositiveBeforeZero) {
  EXPECT_EQ(detect_episodes(tl("3 0 - 0"), EpisodeRule::Strict).size(), 1u);
  EXPECT_EQ(detect_episodes(tl("3 . 0"), EpisodeRule::Strict).size(), 1u);
  EXPECT_EQ(detect_episodes(tl("3 - . 0"), EpisodeRule::Strict).size(), 0u);
  EXPECT_EQ(detect_episodes(tl("2 0 0 . 0 0 0"), EpisodeRule::Strict).size(), 1u);
}

TEST(Episodes, ClassifyOngoingIsContractError) {
  auto t = tl("1 0");
  auto eps = detect_episodes(t);
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_THROW(classify_fix(t, eps[0], seq_of(2)), std::logic_error);
}

TEST(Durations, Examples) {
  std::vector<std::pair<std::string, std::int64_t>> commits{
      {std::string(40, 'a'), 50}, {std::string(40, 'b'), 100}, {std::string(40, 'c'), 400}};
  auto source = make_sequence(RepoKind::Source, commits);
  auto fixed = analyze_timeline(tl("1 0 -"), source, 1000);
  EXPECT_EQ(fixed[0].duration_seconds, 300);
  auto ongoing = analyze_timeline(tl("1 0 0"), source, 1000);
  EXPECT_EQ(ongoing[0].duration_seconds, 900);
  EXPECT_EQ(episode_duration(ongoing[0], source, 1000), 900);

  std::vector<std::pair<std::string, std::int64_t>> reverted{
      {std::string(40, 'a'), 50}, {std::string(40, 'b'), 400}, {std::string(40, 'c'), 100}};
  auto rev = make_sequence(RepoKind::Source, reverted);
  auto negative = analyze_timeline(tl("1 0 -"), rev, 1000);
  EXPECT_EQ(negative[0].duration_seconds, -300);
  EXPECT_TRUE(survival_durations(negative).empty());
}

TEST(Survival, HandCounted) {
  std::vector<std::int64_t> d{10, 20, 30};
  std::vector<std::int64_t> grid{15};
  auto curve = survival_curve(d, grid);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_DOUBLE_EQ(curve[0].surviving, 2.0 / 3.0);
  std::vector<std::int64_t> zero{0};
  EXPECT_DOUBLE_EQ(survival_curve(d, zero)[0].surviving, 1.0);
  std::vector<std::int64_t> same{50, 50, 50};
  std::vector<std::int64_t> at{50};
  EXPECT_DOUBLE_EQ(survival_curve(same, at)[0].surviving, 0.0);
  EXPECT_TRUE(survival_curve({}, grid).empty());
}

TEST(Survival, DurationsFilterFixedPositive) {
  OutdatedEpisode fixed_pos, fixed_zero, ongoing;
  fixed_pos.end_ordinal = 3;
  fixed_pos.fix = FixEvent{};
  fixed_pos.duration_seconds = 5;
  fixed_zero.end_ordinal = 3;
  fixed_zero.fix = FixEvent{};
  fixed_zero.duration_seconds = 0;
  ongoing.duration_seconds = 100;
  std::vector<OutdatedEpisode> eps{fixed_pos, fixed_zero, ongoing};
  EXPECT_EQ(survival_durations(eps), (std::vector<std::int64_t>{5}));
}

TEST(SurvivalProperty, MonotoneBounded) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> dur(1, 400'000'000);
  std::uniform_int_distribution<int> n(1, 40);
  const auto grid = default_survival_grid();
  ASSERT_EQ(grid.front(), 0);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::int64_t> d(static_cast<std::size_t>(n(rng)));
    for (auto& x : d) x = dur(rng);
    auto curve = survival_curve(d, grid);
    ASSERT_EQ(curve.size(), grid.size());
    EXPECT_DOUBLE_EQ(curve.front().surviving, 1.0);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      EXPECT_GE(curve[i].surviving, 0.0);
      EXPECT_LE(curve[i].surviving, 1.0);
      if (i > 0) {
        EXPECT_LE(curve[i].surviving, curve[i - 1].surviving);
      }
      std::size_t above = 0;
      for (auto x : d) above += x > curve[i].duration ? 1 : 0;
      EXPECT_DOUBLE_EQ(curve[i].surviving, static_cast<double>(above) / static_cast<double>(d.size()));
    }
  }
}

std::vector<OracleSymbol> random_symbols(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<int> count(1, 3);
  std::vector<OracleSymbol> s(static_cast<std::size_t>(len(rng)));
  for (auto& v : s) {
    int k = kind(rng);
    v = k < 2 ? kDot : k < 4 ? kDash : k < 7 ? 0 : count(rng);
  }
  return s;
}

void expect_matches_oracle(const std::vector<OracleSymbol>& s, EpisodeRule rule) {
  ElementTimeline t{"e", {}, from_oracle(s), std::nullopt};
  auto source = seq_of(s.size());
  auto got = analyze_timeline(t, source, 1'000'000, rule);
  auto want = testing::oracle_episodes(s, rule == EpisodeRule::Strict);
  const std::string shown = render_symbols(t.symbols);
  ASSERT_EQ(got.size(), want.size()) << shown;
  std::uint64_t kinds = 0, fixed = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].start_ordinal, want[i].start) << shown;
    EXPECT_EQ(got[i].end_ordinal, want[i].end) << shown;
    ASSERT_EQ(got[i].fix.has_value(), want[i].fix.has_value()) << shown;
    if (want[i].fix) {
      ++fixed;
      ++kinds;
      EXPECT_EQ(got[i].fix->kind, to_kind(*want[i].fix)) << shown;
    }
    EXPECT_TRUE(t.symbols[got[i].start_ordinal].is_zero());
    if (i > 0) {
        EXPECT_GT(got[i].start_ordinal, *got[i - 1].end_ordinal);
      }
  }
  EXPECT_EQ(kinds, fixed);
}

TEST(EpisodeProperty, LiteralRuleMatchesOracle) {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 2000; ++iter) expect_matches_oracle(random_symbols(rng), EpisodeRule::Literal);
}

TEST(EpisodeProperty, StrictRuleMatchesOracle) {
  std::mt19937_64 rng(4048);
  for (int iter = 0; iter < 2000; ++iter) expect_matches_oracle(random_symbols(rng), EpisodeRule::Strict);
}

TEST(EpisodeProperty, ExhaustiveShortSequences) {
  const std::vector<OracleSymbol> alphabet{kDot, kDash, 0, 1};
  for (std::size_t len = 0; len <= 6; ++len) {
    std::vector<std::size_t> idx(len, 0);
    for (;;) {
      std::vector<OracleSymbol> s;
      for (auto k : idx) s.push_back(alphabet[k]);
      expect_matches_oracle(s, EpisodeRule::Literal);
      expect_matches_oracle(s, EpisodeRule::Strict);
      std::size_t p = 0;
      while (p < len && ++idx[p] == alphabet.size()) idx[p++] = 0;
      if (p == len) break;
    }
  }
}

TEST(EpisodeProperty, CoveredZerosBelongToExactlyOneEpisode) {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 500; ++iter) {
    auto s = random_symbols(rng);
    ElementTimeline t{"e", {}, from_oracle(s), std::nullopt};
    auto eps = detect_episodes(t);
    bool positive = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] > 0) positive = true;
      if (s[i] != 0 || !positive) continue;
      std::size_t owners = 0;
      for (const auto& e : eps) {
        std::size_t end = e.end_ordinal.value_or(s.size());
        if (i >= e.start_ordinal && i < end) ++owners;
      }
      EXPECT_EQ(owners, 1u) << render_symbols(t.symbols) << " at " << i;
    }
  }
}

}  // namespace
}  // namespace staledoc
