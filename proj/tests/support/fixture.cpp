#include "fixture.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace staledoc::testing {

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "staledoc-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

FixtureRepo::FixtureRepo(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  git({"init", "-q", "-b", "main"});
}

std::string FixtureRepo::git(const std::vector<std::string>& args, const EnvOverrides& env) const {
  std::vector<std::string> argv{"git",
                                "-C",
                                dir_.string(),
                                "-c",
                                "user.name=Fixture",
                                "-c",
                                "user.email=fixture@example.invalid",
                                "-c",
                                "commit.gpgsign=false",
                                "-c",
                                "init.defaultBranch=main"};
  argv.insert(argv.end(), args.begin(), args.end());
  auto r = run_process(argv, env);
  if (!r.ok()) throw std::runtime_error("git " + args.front() + " failed: " + r.err);
  return r.out;
}

void FixtureRepo::write(const std::string& relative, const std::string& content) {
  fs::path p = dir_ / relative;
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << content;
}

void FixtureRepo::remove(const std::string& relative) { fs::remove(dir_ / relative); }

bool FixtureRepo::exists(const std::string& relative) const { return fs::exists(dir_ / relative); }

std::string FixtureRepo::commit(const std::string& message, std::int64_t timestamp) {
  const std::string date = "@" + std::to_string(timestamp) + " +0000";
  const EnvOverrides env{{"GIT_AUTHOR_DATE", date}, {"GIT_COMMITTER_DATE", date}};
  git({"add", "-A"});
  git({"commit", "-q", "--allow-empty", "-m", message}, env);
  auto sha = git({"rev-parse", "HEAD"});
  while (!sha.empty() && sha.back() == '\n') sha.pop_back();
  return sha;
}

void FixtureRepo::checkout(const std::string& branch, bool create) {
  if (create) {
    git({"checkout", "-q", "-b", branch});
  } else {
    git({"checkout", "-q", branch});
  }
}

std::string FixtureRepo::merge(const std::string& branch, std::int64_t timestamp) {
  const std::string date = "@" + std::to_string(timestamp) + " +0000";
  const EnvOverrides env{{"GIT_AUTHOR_DATE", date}, {"GIT_COMMITTER_DATE", date}};
  git({"merge", "-q", "--no-ff", "-m", "merge " + branch, branch}, env);
  auto sha = git({"rev-parse", "HEAD"});
  while (!sha.empty() && sha.back() == '\n') sha.pop_back();
  return sha;
}

std::string staledoc_binary() { return STALEDOC_BINARY; }

ProcessResult run_staledoc(const std::vector<std::string>& args, const EnvOverrides& env) {
  std::vector<std::string> argv{staledoc_binary()};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_process(argv, env);
}

std::string repeat_lines(const std::string& text, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += text + "\n";
  return out;
}

}  // namespace staledoc::testing
