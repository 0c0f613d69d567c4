#include "staledoc/commands.hpp"

#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "staledoc/pipeline.hpp"
#include "staledoc/process.hpp"

namespace staledoc::cli {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  if (repo.has_value() == url.has_value()) throw UsageError("exactly one of --repo or --url is required");
  if (!(timeout_seconds > 0)) throw UsageError("--timeout must be positive");
  if (max_file_bytes == 0) throw UsageError("--max-file-bytes must be positive");
  if (jobs == 0) throw UsageError("--jobs must be positive");
  if (format != "json" && format != "csv" && format != "md" && format != "markdown" && format != "issue") {
    throw UsageError("--format must be one of json, csv, md, issue");
  }
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary file and a rename so readers never see a
// truncated report.
void emit(const std::optional<std::string>& out_path, const std::string& text, std::ostream& out) {
  if (!out_path || *out_path == "-") {
    out << text;
    out.flush();
    return;
  }
  fs::path target(*out_path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string repo_name(std::string url) {
  while (!url.empty() && (url.back() == '/' || url.back() == '\\')) url.pop_back();
  if (url.ends_with(".git")) url.resize(url.size() - 4);
  auto cut = url.find_last_of("/:");
  std::string name = cut == std::string::npos ? url : url.substr(cut + 1);
  return name.empty() ? "repo" : name;
}

std::int64_t resolve_scan_time(const std::optional<std::string>& text) {
  if (!text) {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
  if (auto t = parse_rfc3339(*text)) return *t;
  std::int64_t v = 0;
  std::size_t used = 0;
  try {
    v = std::stoll(*text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text->size()) throw UsageError("--scan-time must be RFC 3339 or epoch seconds");
  return v;
}

std::pair<std::size_t, std::optional<std::size_t>> parse_columns(const std::optional<std::string>& spec) {
  if (!spec) return {0, std::nullopt};
  auto colon = spec->find(':');
  try {
    if (colon == std::string::npos) {
      auto c = std::stoul(*spec);
      if (c == 0) throw UsageError("");
      return {c - 1, c};
    }
    std::size_t first = colon == 0 ? 0 : std::stoul(spec->substr(0, colon)) - 1;
    std::optional<std::size_t> last;
    if (colon + 1 < spec->size()) last = std::stoul(spec->substr(colon + 1));
    return {first, last};
  } catch (const std::exception&) {
    throw UsageError("--columns expects FIRST:LAST revision numbers, e.g. 37:43");
  }
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "staledoc-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("cannot create temporary directory");
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

struct Prepared {
  PipelineConfig pipeline;
  std::unique_ptr<TempDir> temp;
};

Prepared prepare(const RunConfig& rc, std::ostream& err) {
  rc.validate();
  Prepared p;
  auto& pc = p.pipeline;
  std::optional<std::string> remote;

  if (rc.url) {
    p.temp = std::make_unique<TempDir>();
    std::ostringstream sink;
    if (cmd_fetch(*rc.url, rc.wiki == "auto", p.temp->path, sink, err) != kExitClean) {
      throw std::runtime_error("could not clone " + *rc.url);
    }
    pc.source = p.temp->path / repo_name(*rc.url);
    remote = rc.url;
  } else {
    pc.source = fs::path(*rc.repo);
  }

  if (rc.wiki == "auto") {
    fs::path candidate = pc.source.lexically_normal();
    if (candidate.filename().empty()) candidate = candidate.parent_path();
    candidate += ".wiki";
    if (fs::is_directory(candidate)) pc.wiki = candidate;
  } else if (rc.wiki != "none") {
    pc.wiki = fs::path(rc.wiki);
  }

  pc.branch = rc.branch;
  if (rc.regex_file) {
    pc.catalog = std::make_shared<const RegexCatalog>(load_catalog(read_file(*rc.regex_file)));
  }
  pc.discovery.extra_doc_globs = rc.doc_globs;
  for (const auto& g : rc.exclude) pc.match.exclude_globs.push_back(g);
  pc.match.max_file_bytes = rc.max_file_bytes;
  pc.jobs = rc.jobs;
  pc.scan_time = resolve_scan_time(rc.scan_time);
  pc.deadline = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(rc.timeout_seconds));
  pc.episode_rule = rc.strict_episodes ? EpisodeRule::Strict : EpisodeRule::Literal;

  if (!remote) {
    if (auto repo = GitRepository::open(pc.source); auto r = repo.remote_url("origin")) remote = r;
  }
  if (rc.url_base) {
    pc.urls.base = *rc.url_base;
  } else if (remote) {
    pc.urls.base = github_base_from_remote(*remote).value_or("");
  }
  while (!pc.urls.base.empty() && pc.urls.base.back() == '/') pc.urls.base.pop_back();

  if (rc.project) {
    pc.project = *rc.project;
  } else if (pc.urls.enabled() && pc.urls.base.starts_with("https://github.com/")) {
    pc.project = pc.urls.base.substr(std::string_view("https://github.com/").size());
  } else {
    pc.project = repo_name(fs::absolute(pc.source).lexically_normal().string());
  }
  return p;
}

int report_error(std::ostream& err, const std::string& message) {
  err << "staledoc: error: " << message << "\n";
  return kExitError;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    return report_error(err, e.what());
  } catch (const CatalogError& e) {
    std::string where = e.line() ? " (line " + std::to_string(e.line()) + ")" : "";
    return report_error(err, std::string("regex catalog: ") + e.what() + where);
  } catch (const GitError& e) {
    return report_error(err, std::string(to_string(e.code())) + ": " + e.what());
  } catch (const std::exception& e) {
    return report_error(err, e.what());
  }
}

int finish_report(const RunConfig& rc, const PipelineResult& result, std::ostream& out, std::ostream& err) {
  const ScanReport& report = result.report;
  std::string text;
  if (rc.format == "issue") {
    try {
      text = render_issue_draft(report);
    } catch (const std::invalid_argument&) {
      err << "staledoc: no outdated references; no issue draft written\n";
    }
  } else if (report.mode == ReportMode::History && rc.table) {
    auto [first, last] = parse_columns(rc.columns);
    const std::size_t offset = report.revisions.empty() ? 0 : report.revisions.front().ordinal;
    first = first > offset ? first - offset : 0;
    if (last) last = *last > offset ? *last - offset : 0;
    const auto format = rc.format == "csv" ? TableFormat::Csv : TableFormat::Text;
    try {
      text = render_history_table(report.timelines, report.revisions, format, first, last);
    } catch (const TableTooWide& e) {
      err << "staledoc: warning: " << e.what() << "; writing JSON timelines instead\n";
      text = render_findings(report, OutputFormat::Json);
    }
  } else {
    text = render_findings(report, *parse_output_format(rc.format));
  }
  if (!text.empty()) emit(rc.out, text, out);

  for (const auto& w : report.warnings) {
    if (w.kind == "timeout" || w.kind == "wiki-unavailable") err << "staledoc: warning: " << w.message << "\n";
  }
  if (result.timed_out) return kExitTimeout;
  bool outdated = false;
  for (const auto& f : report.findings) outdated = outdated || f.outdated();
  return outdated ? kExitOutdated : kExitClean;
}

}  // namespace

int cmd_fetch(const std::string& url, bool with_wiki, const fs::path& dest, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (url.empty()) throw UsageError("fetch: empty URL");
    fs::create_directories(dest);
    const std::string name = repo_name(url);
    const fs::path source = dest / name;
    const EnvOverrides env{{"GIT_TERMINAL_PROMPT", "0"}};
    auto r = run_process({"git", "clone", "--quiet", "--no-checkout", url, source.string()}, env);
    if (!r.ok()) return report_error(err, "cannot clone " + url + ": " + r.err);
    out << "source\t" << source.string() << "\n";
    if (with_wiki) {
      std::string wiki_url = url;
      while (!wiki_url.empty() && wiki_url.back() == '/') wiki_url.pop_back();
      if (wiki_url.ends_with(".git")) wiki_url.resize(wiki_url.size() - 4);
      wiki_url += ".wiki";
      fs::path wiki = dest / (name + ".wiki");
      auto w = run_process({"git", "clone", "--quiet", "--no-checkout", wiki_url, wiki.string()}, env);
      if (w.ok()) {
        out << "wiki\t" << wiki.string() << "\n";
      } else {
        err << "staledoc: warning: no wiki at " << wiki_url << "\n";
      }
    }
    return static_cast<int>(kExitClean);
  });
}

int cmd_scan(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto prepared = prepare(config, err);
    auto result = run_scan(prepared.pipeline);
    return finish_report(config, result, out, err);
  });
}

int cmd_history(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto prepared = prepare(config, err);
    auto result = run_history(prepared.pipeline);
    return finish_report(config, result, out, err);
  });
}

int cmd_stats(const std::vector<std::string>& files, const std::string& format,
              const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (files.empty()) throw UsageError("stats: at least one report file is required");
    std::vector<ScanReport> reports;
    for (const auto& file : files) {
      try {
        reports.push_back(parse_report_json(read_file(file)));
      } catch (const std::exception& e) {
        return report_error(err, file + ": " + e.what());
      }
    }
    auto aggregates = aggregate_corpus(reports);
    if (format == "json") {
      emit(out_path, render_aggregates_json(aggregates), out);
    } else if (format == "md" || format == "markdown") {
      emit(out_path, render_aggregates_markdown(aggregates), out);
    } else {
      throw UsageError("stats: --format must be json or md");
    }
    return static_cast<int>(kExitClean);
  });
}

int cmd_dump_catalog(std::ostream& out) {
  out << default_catalog_text();
  return kExitClean;
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace {

std::string env_name(std::string_view option) {
  std::string name = "STALEDOC_";
  for (char c : option) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

// Fills options not given on the command line from the environment, then
// from the config file. Section-specific config keys win over top-level
// ones.
void apply_fallbacks(CLI::App& app, const std::vector<CLI::ConfigItem>& items) {
  for (CLI::Option* opt : app.get_options()) {
    if (opt->count() > 0 || opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;

    std::vector<std::string> values;
    if (const char* v = std::getenv(env_name(name).c_str()); v != nullptr) {
      values.emplace_back(v);
    } else {
      const CLI::ConfigItem* found = nullptr;
      for (const auto& item : items) {
        if (item.name != name) continue;
        if (item.parents.empty() && !found) found = &item;
        if (item.parents.size() == 1 && item.parents.front() == app.get_name()) found = &item;
      }
      if (found) values = found->inputs;
    }
    if (values.empty()) continue;
    for (auto& v : values) opt->add_result(v);
    opt->run_callback();
  }
}

void add_run_options(CLI::App& sub, RunConfig& rc) {
  sub.add_option("--repo", rc.repo, "Local clone of the source repository");
  sub.add_option("--url", rc.url, "Clone this URL into a temporary directory first");
  sub.add_option("--wiki", rc.wiki, "Wiki clone path, 'auto' or 'none'")->capture_default_str();
  sub.add_option("--branch", rc.branch, "Branch to analyze (default: HEAD)");
  sub.add_option("--regex-file", rc.regex_file, "Regex catalog replacing the built-in one");
  sub.add_option("--exclude", rc.exclude, "Gitignore-style glob never scanned (repeatable)")->delimiter(',');
  sub.add_option("--doc-glob", rc.doc_globs, "Further documentation files in the source repository")
      ->delimiter(',');
  sub.add_option("--format", rc.format, "json, csv, md or issue")->capture_default_str();
  sub.add_option("--out", rc.out, "Output file (default: standard output)");
  sub.add_option("--timeout", rc.timeout_seconds, "Seconds before a partial report is written")
      ->capture_default_str();
  sub.add_option("--max-file-bytes", rc.max_file_bytes, "Skip larger source files")->capture_default_str();
  sub.add_option("--jobs", rc.jobs, "Worker threads")->capture_default_str();
  sub.add_option("--scan-time", rc.scan_time, "Fixed scan time (RFC 3339 or epoch seconds)");
  sub.add_option("--url-base", rc.url_base, "Browse URL base, e.g. https://github.com/owner/repo");
  sub.add_option("--project", rc.project, "Project name in the report");
  sub.add_flag("--strict-episodes", rc.strict_episodes,
               "Open an episode only when the last document-present symbol was a positive count");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detects outdated code element references in README and wiki documentation."};
  app.name("staledoc");
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "TOML/INI file with option defaults");

  RunConfig scan_rc, history_rc;
  scan_rc.jobs = history_rc.jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* fetch = app.add_subcommand("fetch", "Clone a repository and its wiki");
  std::string fetch_url, fetch_dest = ".";
  bool fetch_wiki = true;
  fetch->add_option("url", fetch_url, "Repository URL")->required();
  fetch->add_option("--dest", fetch_dest, "Directory receiving the clones")->capture_default_str();
  fetch->add_flag("--wiki,!--no-wiki", fetch_wiki, "Also clone <url>.wiki");

  auto* scan = app.add_subcommand("scan", "Check the current documentation against the source head");
  add_run_options(*scan, scan_rc);

  auto* history = app.add_subcommand("history", "Analyze references across the whole history");
  add_run_options(*history, history_rc);
  history->add_flag("--table", history_rc.table, "Write the per-revision table (text, or CSV with --format csv)");
  history->add_option("--columns", history_rc.columns, "Table revision range FIRST:LAST (1-based)");

  auto* stats = app.add_subcommand("stats", "Pool aggregates over JSON reports");
  std::vector<std::string> stats_files;
  std::string stats_format = "json";
  std::optional<std::string> stats_out;
  stats->add_option("reports", stats_files, "Report files")->required();
  stats->add_option("--format", stats_format, "json or md")->capture_default_str();
  stats->add_option("--out", stats_out, "Output file");

  auto* dump = app.add_subcommand("dump-catalog", "Print the built-in regex catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "staledoc: usage error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (config_file.empty()) {
      if (const char* v = std::getenv("STALEDOC_CONFIG")) config_file = v;
    }
    std::vector<CLI::ConfigItem> items;
    if (!config_file.empty()) items = CLI::ConfigTOML().from_file(config_file);
    for (auto* sub : {fetch, scan, history, stats}) {
      if (sub->parsed()) apply_fallbacks(*sub, items);
    }
  } catch (const std::exception& e) {
    err << "staledoc: usage error: " << e.what() << "\n";
    return kExitError;
  }

  if (fetch->parsed()) return cmd_fetch(fetch_url, fetch_wiki, fetch_dest, out, err);
  if (scan->parsed()) return cmd_scan(scan_rc, out, err);
  if (history->parsed()) return cmd_history(history_rc, out, err);
  if (stats->parsed()) return cmd_stats(stats_files, stats_format, stats_out, out, err);
  if (dump->parsed()) return cmd_dump_catalog(out);
  return kExitError;
}

}  // namespace staledoc::cli
