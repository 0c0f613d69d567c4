#include <algorithm>

#include "staledoc/revgraph.hpp"

namespace staledoc {

const Revision& snapshot_for_doc(std::int64_t doc_timestamp, const RevisionSequence& source) {
  if (source.empty()) throw std::invalid_argument("snapshot_for_doc: empty source sequence");
  const Revision& head = source.head();
  if (doc_timestamp >= head.timestamp) return head;

  const Revision* best = nullptr;
  for (const auto& r : source.revisions) {
    if (r.timestamp <= doc_timestamp && (best == nullptr || r.timestamp >= best->timestamp)) best = &r;
  }
  return best != nullptr ? *best : source.revisions.front();
}

const Revision& snapshot_for_doc(const DocVersion& version, const RevisionSequence& source) {
  return snapshot_for_doc(version.timestamp(), source);
}

std::vector<LinkedRevision> link_source_to_docs(const RevisionSequence& source,
                                                std::span<const DocVersion> versions) {
  std::vector<LinkedRevision> links;
  links.reserve(source.size());
  for (const auto& r : source.revisions) {
    if (versions.empty()) {
      links.push_back({r, std::nullopt});
      continue;
    }
    // First version with timestamp >= r, then advance across equal timestamps.
    auto it = std::lower_bound(versions.begin(), versions.end(), r.timestamp,
                               [](const DocVersion& v, std::int64_t t) { return v.timestamp() < t; });
    std::size_t index = versions.size() - 1;
    if (it != versions.end()) {
      auto last_equal = std::upper_bound(it, versions.end(), it->timestamp(),
                                         [](std::int64_t t, const DocVersion& v) { return t < v.timestamp(); });
      index = static_cast<std::size_t>(last_equal - versions.begin()) - 1;
    }
    links.push_back({r, index});
  }
  return links;
}

std::vector<LinkedRevision> link_same_repository(const RevisionSequence& source,
                                                 std::span<const DocVersion> versions) {
  if (versions.size() != source.size()) {
    throw std::invalid_argument("link_same_repository: one version per source revision required");
  }
  std::vector<LinkedRevision> links;
  links.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) links.push_back({source[i], i});
  return links;
}

}  // namespace staledoc
