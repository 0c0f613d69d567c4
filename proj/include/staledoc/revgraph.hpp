#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "staledoc/docdiscovery.hpp"
#include "staledoc/process.hpp"

namespace staledoc {

enum class GitErrc {
  MissingRepository,
  UnknownBranch,
  EmptyHistory,
  UnknownRevision,
  MissingPath,
  CommandFailed,
};

std::string_view to_string(GitErrc code);

class GitError : public std::runtime_error {
 public:
  GitError(GitErrc code, const std::string& message) : std::runtime_error(message), code_(code) {}
  GitErrc code() const { return code_; }

 private:
  GitErrc code_;
};

struct Revision {
  std::string sha;
  /// Committer time, seconds since the epoch.
  std::int64_t timestamp = 0;
  std::size_t ordinal = 0;

  bool operator==(const Revision&) const = default;
};

enum class RepoKind { Source, Wiki };

/// First-parent history of a branch, oldest first. Timestamps are not
/// guaranteed to be monotone.
struct RevisionSequence {
  RepoKind kind = RepoKind::Source;
  std::vector<Revision> revisions;

  bool empty() const { return revisions.empty(); }
  std::size_t size() const { return revisions.size(); }
  const Revision& operator[](std::size_t i) const { return revisions[i]; }
  const Revision& head() const { return revisions.back(); }
};

/// Builds a sequence with ordinals assigned 0..n-1 from (sha, timestamp)
/// pairs already in oldest-first order.
RevisionSequence make_sequence(RepoKind kind,
                               std::vector<std::pair<std::string, std::int64_t>> commits);

bool is_valid_sha(std::string_view sha);

struct TreeEntry {
  std::string path;
  std::string blob;
  std::uint32_t mode = 0100644;
};

/// A persistent `git cat-file --batch` reader. Confined to one thread.
class ObjectReader {
 public:
  explicit ObjectReader(const std::filesystem::path& repo);

  struct Object {
    std::string type;
    std::string content;
  };

  /// Returns nullopt when the object does not exist.
  std::optional<Object> read(std::string_view spec);

 private:
  PipedProcess process_;
  std::string line_;
};

/// Handle to a local clone (bare or with a worktree). Not thread-safe; open
/// one handle per worker.
class GitRepository {
 public:
  /// Throws GitError{MissingRepository} when `path` is not a git repository.
  static GitRepository open(const std::filesystem::path& path);

  const std::filesystem::path& path() const { return path_; }

  /// First-parent linearization of `branch` (HEAD when unset), oldest first.
  RevisionSequence linearize_history(const std::optional<std::string>& branch = std::nullopt,
                                     RepoKind kind = RepoKind::Source) const;

  /// All tracked blobs (submodule links skipped), sorted by path. With
  /// `recursive == false` only files at the root are listed.
  std::vector<TreeEntry> tree_at(const Revision& revision, bool recursive = true);
  std::vector<std::string> list_files(const Revision& revision);

  std::string read_blob(const Revision& revision, std::string_view path);
  /// Reads a blob by object id; nullopt if missing.
  std::optional<std::string> read_object(std::string_view blob_id);

  /// Most recent first-parent commit at or before `head` whose change set
  /// touches `path`.
  std::optional<std::pair<std::string, std::int64_t>> last_change(const Revision& head,
                                                                  std::string_view path) const;

  std::optional<std::string> remote_url(std::string_view remote = "origin") const;

  ProcessResult git(const std::vector<std::string>& args) const;

 private:
  explicit GitRepository(std::filesystem::path path) : path_(std::move(path)) {}
  ObjectReader& reader();
  void read_tree(std::string_view tree_id, const std::string& prefix, std::vector<TreeEntry>& out,
                 bool recursive);

  std::filesystem::path path_;
  std::size_t hash_bytes_ = 20;
  std::unique_ptr<ObjectReader> reader_;
};

/// One version of a document: its state at one commit of the repository
/// that stores it. `present == false` means the file did not exist there.
struct DocVersion {
  DocumentDescriptor descriptor;
  Revision revision;
  bool present = false;
  std::string blob;
  /// Full text at that revision; empty when absent. Shared between versions
  /// with identical content.
  std::shared_ptr<const std::string> text;

  std::int64_t timestamp() const { return revision.timestamp; }
};

/// The source revision in effect when a document version was committed:
/// the head if the document postdates it, else the greatest timestamp at or
/// before the document (ties toward the later ordinal), else the first
/// revision. Throws std::invalid_argument on an empty sequence.
const Revision& snapshot_for_doc(std::int64_t doc_timestamp, const RevisionSequence& source);
const Revision& snapshot_for_doc(const DocVersion& version, const RevisionSequence& source);

struct LinkedRevision {
  Revision revision;
  /// Index into the document's version list; nullopt when there are none.
  std::optional<std::size_t> version;
};

/// Pairs each source revision with the next documentation version: the
/// earliest version timestamp at or after the revision (the last of equal
/// timestamps), or the final version once the revision postdates them all.
/// `versions` must be sorted by timestamp.
std::vector<LinkedRevision> link_source_to_docs(const RevisionSequence& source,
                                                std::span<const DocVersion> versions);

/// Linking for documents stored in the source repository itself, where
/// version i is the document state at source revision i.
std::vector<LinkedRevision> link_same_repository(const RevisionSequence& source,
                                                 std::span<const DocVersion> versions);

}  // namespace staledoc
