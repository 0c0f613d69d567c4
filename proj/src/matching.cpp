#include "staledoc/matching.hpp"

#include <algorithm>
#include <stdexcept>

namespace staledoc {

void MatchConfig::validate() const {
  if (max_file_bytes == 0) throw std::invalid_argument("max-file-bytes must be positive");
  if (per_file_cap == 0) throw std::invalid_argument("per-file count cap must be positive");
  PathFilter check(exclude_globs);
}

WordCount count_whole_word(std::string_view text, std::string_view element, std::uint64_t cap) {
  WordCount result;
  if (element.empty()) return result;
  const bool guard_front = is_word_char(element.front());
  const bool guard_back = is_word_char(element.back());
  const std::size_t len = element.size();

  std::size_t line = 1;
  std::size_t line_scanned = 0;
  std::size_t pos = 0;
  while ((pos = text.find(element, pos)) != std::string_view::npos) {
    bool ok = !(guard_front && pos > 0 && is_word_char(text[pos - 1])) &&
              !(guard_back && pos + len < text.size() && is_word_char(text[pos + len]));
    if (!ok) {
      ++pos;
      continue;
    }
    if (result.count == 0) {
      line += static_cast<std::size_t>(std::count(text.begin() + line_scanned, text.begin() + pos, '\n'));
      line_scanned = pos;
      result.first_line = line;
    }
    ++result.count;
    pos += len;
    if (result.count >= cap) {
      result.capped = text.find(element, pos) != std::string_view::npos;
      break;
    }
  }
  return result;
}

bool looks_binary(std::string_view content) {
  return content.substr(0, 8192).find('\0') != std::string_view::npos;
}

std::set<std::string> expand_path_variants(std::span<const std::string> listing) {
  std::set<std::string> variants;
  for (const auto& path : listing) {
    std::size_t start = 0;
    while (start < path.size()) {
      std::string suffix = path.substr(start);
      variants.insert("/" + suffix);
      variants.insert(std::move(suffix));
      auto slash = path.find('/', start);
      if (slash == std::string::npos) break;
      start = slash + 1;
    }
  }
  return variants;
}

bool is_path_variant(std::string_view element, std::string_view path) {
  if (!element.empty() && element.front() == '/') element.remove_prefix(1);
  if (element.empty() || element.front() == '/' || element.size() > path.size()) return false;
  if (!path.ends_with(element)) return false;
  return element.size() == path.size() || path[path.size() - element.size() - 1] == '/';
}

std::string_view to_string(CurrentStatus status) {
  switch (status) {
    case CurrentStatus::Outdated: return "outdated";
    case CurrentStatus::InSync: return "in-sync";
    case CurrentStatus::NeverMatched: return "never-matched";
  }
  return "unknown";
}

std::optional<CurrentStatus> parse_current_status(std::string_view text) {
  for (auto s : {CurrentStatus::Outdated, CurrentStatus::InSync, CurrentStatus::NeverMatched}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

CurrentStatus classify_current(const InstanceCount& snapshot, const InstanceCount& current) {
  if (snapshot.element != current.element) {
    throw std::logic_error("classify_current: counts are for different elements ('" + snapshot.element +
                           "' vs '" + current.element + "')");
  }
  if (snapshot.count == 0) return CurrentStatus::NeverMatched;
  return current.count == 0 ? CurrentStatus::Outdated : CurrentStatus::InSync;
}

std::shared_ptr<const BlobScanCache::Entry> BlobScanCache::find(const std::string& blob) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(blob);
  return it == entries_.end() ? nullptr : it->second;
}

void BlobScanCache::insert(const std::string& blob, std::shared_ptr<const Entry> entry) {
  std::unique_lock lock(mutex_);
  entries_.emplace(blob, std::move(entry));
}

InstanceCounter::InstanceCounter(std::vector<std::string> elements, MatchConfig config,
                                 std::shared_ptr<BlobScanCache> cache)
    : elements_(std::move(elements)),
      config_(std::move(config)),
      excludes_(config_.exclude_globs),
      cache_(cache ? std::move(cache) : std::make_shared<BlobScanCache>()) {
  config_.validate();
  for (const auto& e : elements_) {
    if (e.empty()) throw std::invalid_argument("InstanceCounter: empty element text");
  }
}

void InstanceCounter::warn(ScanWarning w) {
  std::lock_guard lock(warnings_mutex_);
  warnings_.insert(std::move(w));
}

std::vector<ScanWarning> InstanceCounter::warnings() const {
  std::lock_guard lock(warnings_mutex_);
  return {warnings_.begin(), warnings_.end()};
}

std::shared_ptr<const BlobScanCache::Entry> InstanceCounter::scan_blob(GitRepository& repo, const TreeEntry& entry) {
  if (auto cached = cache_->find(entry.blob)) return cached;

  auto result = std::make_shared<BlobScanCache::Entry>();
  std::optional<std::string> content;
  try {
    content = repo.read_object(entry.blob);
  } catch (const GitError& e) {
    content.reset();
  }
  if (!content) {
    result->status = BlobScanCache::Status::Unreadable;
    warn({"unreadable-blob", entry.path, entry.blob, "blob could not be read; file skipped"});
  } else if (content->size() > config_.max_file_bytes) {
    result->status = BlobScanCache::Status::Oversize;
    warn({"oversize-file", entry.path, entry.blob,
          "file exceeds " + std::to_string(config_.max_file_bytes) + " bytes; skipped"});
  } else if (looks_binary(*content)) {
    result->status = BlobScanCache::Status::Binary;
  } else {
    for (std::uint32_t i = 0; i < elements_.size(); ++i) {
      auto wc = count_whole_word(*content, elements_[i], config_.per_file_cap);
      if (wc.count == 0) continue;
      if (wc.capped) {
        warn({"count-capped", entry.path, entry.blob,
              "count of '" + elements_[i] + "' capped at " + std::to_string(config_.per_file_cap)});
      }
      result->hits.push_back({i, wc.count, wc.first_line});
    }
  }
  cache_->insert(entry.blob, result);
  return result;
}

std::vector<InstanceCount> InstanceCounter::count_revision(GitRepository& repo, const Revision& revision,
                                                           const std::unordered_set<std::string>& extra_excluded) {
  const auto tree = repo.tree_at(revision);
  return count_tree(repo, revision, tree, extra_excluded);
}

std::vector<InstanceCount> InstanceCounter::count_tree(GitRepository& repo, const Revision& revision,
                                                       std::span<const TreeEntry> tree,
                                                       const std::unordered_set<std::string>& extra_excluded) {
  std::vector<InstanceCount> counts(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    counts[i].element = elements_[i];
    counts[i].revision = revision;
  }
  auto add_evidence = [&](InstanceCount& c, MatchedPath p) {
    if (c.matched_paths.size() < config_.matched_paths_limit) c.matched_paths.push_back(std::move(p));
  };

  std::unordered_map<std::string_view, std::vector<std::size_t>> by_basename;
  for (std::size_t f = 0; f < tree.size(); ++f) {
    std::string_view p = tree[f].path;
    auto slash = p.rfind('/');
    by_basename[slash == std::string_view::npos ? p : p.substr(slash + 1)].push_back(f);
  }

  // Content matches, in path order.
  for (const auto& entry : tree) {
    if (extra_excluded.contains(entry.path) || excludes_.excluded(entry.path)) continue;
    auto scan = scan_blob(repo, entry);
    for (const auto& hit : scan->hits) {
      auto& c = counts[hit.element];
      c.count += hit.count;
      add_evidence(c, {entry.path, hit.first_line, false});
    }
  }

  // File-path variants: each file whose path has the element as a variant
  // contributes one synthetic instance.
  for (auto& c : counts) {
    std::string_view e = c.element;
    auto slash = e.rfind('/');
    auto base = slash == std::string_view::npos ? e : e.substr(slash + 1);
    auto it = by_basename.find(base);
    if (it == by_basename.end()) continue;
    for (auto f : it->second) {
      if (!is_path_variant(e, tree[f].path)) continue;
      ++c.count;
      add_evidence(c, {tree[f].path, 0, true});
    }
  }
  return counts;
}

InstanceCount count_instances(GitRepository& repo, std::string_view element, const Revision& revision,
                              const MatchConfig& config, const std::unordered_set<std::string>& extra_excluded) {
  if (element.empty()) throw std::invalid_argument("count_instances: empty element text");
  InstanceCounter counter({std::string(element)}, config);
  return std::move(counter.count_revision(repo, revision, extra_excluded).front());
}

}  // namespace staledoc
