#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "staledoc/process.hpp"

namespace staledoc::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// A scripted git repository with controlled commit timestamps.
class FixtureRepo {
 public:
  /// Initializes an empty repository on branch `main`.
  explicit FixtureRepo(fs::path dir);

  const fs::path& path() const { return dir_; }

  void write(const std::string& relative, const std::string& content);
  void remove(const std::string& relative);
  bool exists(const std::string& relative) const;

  /// Stages everything and commits (empty commits allowed). Author and
  /// committer time are both `timestamp`. Returns the commit sha.
  std::string commit(const std::string& message, std::int64_t timestamp);

  void checkout(const std::string& branch, bool create = false);
  /// Non-fast-forward merge of `branch` into the current branch.
  std::string merge(const std::string& branch, std::int64_t timestamp);

  /// Runs git in the repository; throws std::runtime_error on failure.
  std::string git(const std::vector<std::string>& args, const EnvOverrides& env = {}) const;

 private:
  fs::path dir_;
};

/// Runs the built CLI binary.
ProcessResult run_staledoc(const std::vector<std::string>& args, const EnvOverrides& env = {});

/// Path of the CLI under test (STALEDOC_BINARY at compile time).
std::string staledoc_binary();

/// `text` repeated `n` times, one per line.
std::string repeat_lines(const std::string& text, std::size_t n);

}  // namespace staledoc::testing
