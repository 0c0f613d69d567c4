#include <algorithm>
#include <charconv>
#include <sstream>

#include "staledoc/revgraph.hpp"

namespace staledoc {
namespace {

std::string to_hex(std::string_view raw) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(raw.size() * 2);
  for (unsigned char c : raw) {
    out += kDigits[c >> 4];
    out += kDigits[c & 0xF];
  }
  return out;
}

std::string trim_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::pair<std::string, std::int64_t> parse_sha_time(const std::string& line) {
  auto space = line.find(' ');
  if (space == std::string::npos) throw GitError(GitErrc::CommandFailed, "unexpected git log line: " + line);
  std::int64_t ts = 0;
  auto tail = std::string_view(line).substr(space + 1);
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), ts);
  if (ec != std::errc{}) throw GitError(GitErrc::CommandFailed, "unexpected git log line: " + line);
  return {line.substr(0, space), ts};
}

}  // namespace

std::string_view to_string(GitErrc code) {
  switch (code) {
    case GitErrc::MissingRepository: return "missing-repository";
    case GitErrc::UnknownBranch: return "unknown-branch";
    case GitErrc::EmptyHistory: return "empty-history";
    case GitErrc::UnknownRevision: return "unknown-revision";
    case GitErrc::MissingPath: return "missing-path";
    case GitErrc::CommandFailed: return "command-failed";
  }
  return "unknown";
}

bool is_valid_sha(std::string_view sha) {
  return (sha.size() == 40 || sha.size() == 64) &&
         std::all_of(sha.begin(), sha.end(),
                     [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

RevisionSequence make_sequence(RepoKind kind, std::vector<std::pair<std::string, std::int64_t>> commits) {
  RevisionSequence seq{kind, {}};
  seq.revisions.reserve(commits.size());
  for (auto& [sha, ts] : commits) {
    seq.revisions.push_back({std::move(sha), ts, seq.revisions.size()});
  }
  return seq;
}

ObjectReader::ObjectReader(const std::filesystem::path& repo)
    : process_({"git", "-C", repo.string(), "cat-file", "--batch"}) {}

std::optional<ObjectReader::Object> ObjectReader::read(std::string_view spec) {
  if (spec.find('\n') != std::string_view::npos) return std::nullopt;
  process_.write(std::string(spec) + "\n");
  if (!process_.read_line(line_)) throw GitError(GitErrc::CommandFailed, "git cat-file terminated");
  // "<oid> <type> <size>" or "<spec> missing" / "<spec> ambiguous".
  auto last = line_.rfind(' ');
  if (last == std::string::npos) throw GitError(GitErrc::CommandFailed, "unexpected cat-file header: " + line_);
  auto tail = std::string_view(line_).substr(last + 1);
  if (tail == "missing" || tail == "ambiguous") return std::nullopt;
  auto mid = line_.rfind(' ', last - 1);
  if (mid == std::string::npos) throw GitError(GitErrc::CommandFailed, "unexpected cat-file header: " + line_);
  std::size_t size = 0;
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), size);
  if (ec != std::errc{}) throw GitError(GitErrc::CommandFailed, "unexpected cat-file header: " + line_);

  Object obj;
  obj.type = line_.substr(mid + 1, last - mid - 1);
  std::string newline;
  if (!process_.read_exact(size, obj.content) || !process_.read_exact(1, newline)) {
    throw GitError(GitErrc::CommandFailed, "git cat-file: truncated object " + std::string(spec));
  }
  return obj;
}

GitRepository GitRepository::open(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_directory(path, ec)) {
    throw GitError(GitErrc::MissingRepository, "not a directory: " + path.string());
  }
  GitRepository repo(std::filesystem::absolute(path));
  auto probe = repo.git({"rev-parse", "--git-dir"});
  if (!probe.ok()) throw GitError(GitErrc::MissingRepository, "not a git repository: " + path.string());
  auto format = repo.git({"rev-parse", "--show-object-format"});
  if (format.ok() && trim_newline(format.out) == "sha256") repo.hash_bytes_ = 32;
  return repo;
}

ProcessResult GitRepository::git(const std::vector<std::string>& args) const {
  std::vector<std::string> argv{"git", "-C", path_.string(), "-c", "core.quotepath=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_process(argv, {{"GIT_TERMINAL_PROMPT", "0"}});
}

RevisionSequence GitRepository::linearize_history(const std::optional<std::string>& branch,
                                                  RepoKind kind) const {
  const std::string ref = branch.value_or("HEAD");
  auto resolved = git({"rev-parse", "--verify", "--quiet", ref + "^{commit}"});
  if (!resolved.ok()) {
    auto head = git({"symbolic-ref", "-q", "HEAD"});
    std::string head_ref = trim_newline(head.out);
    if (!branch || head_ref == "refs/heads/" + *branch) {
      throw GitError(GitErrc::EmptyHistory, "branch '" + (branch ? *branch : head_ref) + "' has no commits in " +
                                                path_.string());
    }
    throw GitError(GitErrc::UnknownBranch, "unknown branch '" + *branch + "' in " + path_.string());
  }
  std::string tip = trim_newline(resolved.out);
  auto log = git({"log", "--first-parent", "--format=%H %ct", tip});
  if (!log.ok()) throw GitError(GitErrc::CommandFailed, "git log failed: " + log.err);

  std::vector<std::pair<std::string, std::int64_t>> commits;
  for (const auto& line : split_lines(log.out)) commits.push_back(parse_sha_time(line));
  if (commits.empty()) throw GitError(GitErrc::EmptyHistory, "no commits on " + ref);
  std::reverse(commits.begin(), commits.end());
  return make_sequence(kind, std::move(commits));
}

ObjectReader& GitRepository::reader() {
  if (!reader_) reader_ = std::make_unique<ObjectReader>(path_);
  return *reader_;
}

void GitRepository::read_tree(std::string_view tree_id, const std::string& prefix,
                              std::vector<TreeEntry>& out, bool recursive) {
  auto obj = reader().read(tree_id);
  if (!obj || obj->type != "tree") {
    throw GitError(GitErrc::UnknownRevision, "missing tree object " + std::string(tree_id));
  }
  std::string_view data = obj->content;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto space = data.find(' ', pos);
    auto nul = data.find('\0', space);
    if (space == std::string_view::npos || nul == std::string_view::npos || nul + 1 + hash_bytes_ > data.size()) {
      throw GitError(GitErrc::CommandFailed, "malformed tree object " + std::string(tree_id));
    }
    std::uint32_t mode = 0;
    std::from_chars(data.data() + pos, data.data() + space, mode, 8);
    std::string name(data.substr(space + 1, nul - space - 1));
    std::string id = to_hex(data.substr(nul + 1, hash_bytes_));
    pos = nul + 1 + hash_bytes_;

    std::string path = prefix.empty() ? name : prefix + "/" + name;
    if (mode == 040000) {
      if (recursive) read_tree(id, path, out, true);
    } else if (mode != 0160000) {
      out.push_back({std::move(path), std::move(id), mode});
    }
  }
}

std::vector<TreeEntry> GitRepository::tree_at(const Revision& revision, bool recursive) {
  auto commit = reader().read(revision.sha);
  if (!commit || commit->type != "commit") {
    throw GitError(GitErrc::UnknownRevision, "unknown revision " + revision.sha);
  }
  if (!commit->content.starts_with("tree ")) {
    throw GitError(GitErrc::CommandFailed, "malformed commit " + revision.sha);
  }
  auto eol = commit->content.find('\n');
  std::string tree = commit->content.substr(5, eol - 5);
  std::vector<TreeEntry> entries;
  read_tree(tree, "", entries, recursive);
  std::sort(entries.begin(), entries.end(),
            [](const TreeEntry& a, const TreeEntry& b) { return a.path < b.path; });
  return entries;
}

std::vector<std::string> GitRepository::list_files(const Revision& revision) {
  std::vector<std::string> paths;
  for (auto& e : tree_at(revision)) paths.push_back(std::move(e.path));
  return paths;
}

std::string GitRepository::read_blob(const Revision& revision, std::string_view path) {
  auto commit = reader().read(revision.sha);
  if (!commit || commit->type != "commit") {
    throw GitError(GitErrc::UnknownRevision, "unknown revision " + revision.sha);
  }
  auto obj = reader().read(revision.sha + ":" + std::string(path));
  if (!obj || obj->type != "blob") {
    throw GitError(GitErrc::MissingPath, "no file '" + std::string(path) + "' at " + revision.sha);
  }
  return std::move(obj->content);
}

std::optional<std::string> GitRepository::read_object(std::string_view blob_id) {
  auto obj = reader().read(blob_id);
  if (!obj || obj->type != "blob") return std::nullopt;
  return std::move(obj->content);
}

std::optional<std::pair<std::string, std::int64_t>> GitRepository::last_change(const Revision& head,
                                                                            std::string_view path) const {
  auto log = git({"log", "--first-parent", "-1", "--format=%H %ct", head.sha, "--", ":(literal)" + std::string(path)});
  if (!log.ok()) throw GitError(GitErrc::CommandFailed, "git log failed: " + log.err);
  auto lines = split_lines(log.out);
  if (lines.empty()) return std::nullopt;
  return parse_sha_time(lines.front());
}

std::optional<std::string> GitRepository::remote_url(std::string_view remote) const {
  auto r = git({"remote", "get-url", std::string(remote)});
  if (!r.ok()) return std::nullopt;
  return trim_newline(r.out);
}

}  // namespace staledoc
