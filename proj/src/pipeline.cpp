#include "staledoc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

namespace staledoc {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

bool expired(const std::optional<Clock::time_point>& deadline) {
  return deadline && Clock::now() >= *deadline;
}

const RegexCatalog& catalog_of(const PipelineConfig& config) {
  return config.catalog ? *config.catalog : default_catalog();
}

/// Runs `fn(repo, ordinal)` for each ordinal of `order` (in that priority)
/// on up to `jobs` workers, each with its own repository handle. Stops
/// picking up work once the deadline passes. The first exception stops the
/// pool and is rethrown.
template <typename Fn>
std::vector<char> run_pool(const fs::path& repo_path, const std::vector<std::size_t>& order, std::size_t slots,
                           unsigned jobs, const std::optional<Clock::time_point>& deadline, Fn&& fn) {
  std::vector<char> done(slots, 0);
  if (order.empty()) return done;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      auto repo = GitRepository::open(repo_path);
      while (!stop.load()) {
        if (expired(deadline)) break;
        const std::size_t k = next.fetch_add(1);
        if (k >= order.size()) break;
        fn(repo, order[k]);
        done[order[k]] = 1;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      stop = true;
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(order.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(n);
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return done;
}

/// First index of the completed suffix of [lo, n).
std::size_t completed_suffix(const std::vector<char>& done, std::size_t lo, std::size_t n) {
  std::size_t s = n;
  while (s > lo && done[s - 1]) --s;
  return s;
}

std::vector<std::size_t> descending(std::size_t lo, std::size_t n) {
  std::vector<std::size_t> order;
  for (std::size_t i = n; i-- > lo;) order.push_back(i);
  return order;
}

struct WikiState {
  std::optional<GitRepository> repo;
  RevisionSequence sequence{RepoKind::Wiki, {}};
};

WikiState open_wiki(const PipelineConfig& config, std::vector<ScanWarning>& warnings) {
  WikiState w;
  if (!config.wiki) return w;
  try {
    w.repo.emplace(GitRepository::open(*config.wiki));
  } catch (const GitError& e) {
    warnings.push_back({"wiki-unavailable", config.wiki->string(), "", e.what()});
    return w;
  }
  try {
    w.sequence = w.repo->linearize_history(std::nullopt, RepoKind::Wiki);
  } catch (const GitError& e) {
    if (e.code() != GitErrc::EmptyHistory) throw;
    warnings.push_back({"wiki-empty", config.wiki->string(), "", e.what()});
  }
  return w;
}

std::set<std::string> reference_texts(std::string_view raw, const RegexCatalog& catalog,
                                      const DocumentDescriptor& doc) {
  std::set<std::string> out;
  for (auto& ref : extract_elements(sanitize_utf8(raw), catalog, doc)) out.insert(std::move(ref.text));
  return out;
}

CommitRef commit_ref(const Revision& r) { return {r.sha, r.timestamp}; }

std::vector<Evidence> to_evidence(const InstanceCount& count, const UrlTemplates& urls) {
  std::vector<Evidence> out;
  for (const auto& m : count.matched_paths) {
    out.push_back({m.path, m.line, m.path_variant, urls.source_url(count.revision.sha, m.path, m.line)});
  }
  return out;
}

void finalize_warnings(std::vector<ScanWarning>& warnings) {
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Current mode

PipelineResult run_scan(const PipelineConfig& config) {
  config.discovery.validate();
  config.match.validate();
  const RegexCatalog& catalog = catalog_of(config);
  PipelineResult result;
  ScanReport& report = result.report;
  report.project = config.project;
  report.scan_time = config.scan_time;
  report.mode = ReportMode::Current;
  std::vector<ScanWarning> warnings;

  auto source = GitRepository::open(config.source);
  const auto seq = source.linearize_history(config.branch, RepoKind::Source);
  const Revision& head = seq.head();
  report.source_head = commit_ref(head);
  report.revisions_total = seq.size();

  const auto head_tree = source.tree_at(head);
  std::vector<std::string> source_paths;
  std::unordered_map<std::string, std::string> source_blobs;
  for (const auto& e : head_tree) {
    source_paths.push_back(e.path);
    source_blobs.emplace(e.path, e.blob);
  }

  WikiState wiki = open_wiki(config, warnings);
  std::optional<std::vector<std::string>> wiki_paths;
  if (wiki.repo) {
    wiki_paths.emplace();
    if (!wiki.sequence.empty()) {
      report.wiki_head = commit_ref(wiki.sequence.head());
      *wiki_paths = wiki.repo->list_files(wiki.sequence.head());
    }
  }

  const auto docs = discover_documents(source_paths, wiki_paths, config.discovery);
  std::unordered_set<std::string> doc_exclusions;
  for (const auto& d : docs) {
    if (d.origin == DocOrigin::Readme) doc_exclusions.insert(d.path);
  }

  struct DocState {
    DocumentDescriptor doc;
    CommitRef commit;
    std::size_t snapshot = 0;
    std::vector<std::string> elements;
  };
  std::vector<DocState> states;
  std::set<std::string> all_elements;
  for (const auto& d : docs) {
    DocState s{d, {}, 0, {}};
    std::string text;
    if (d.origin == DocOrigin::Readme) {
      text = source.read_object(source_blobs.at(d.path)).value_or("");
      auto change = source.last_change(head, d.path);
      s.commit = change ? CommitRef{change->first, change->second} : commit_ref(head);
    } else {
      const Revision& wiki_head = wiki.sequence.head();
      text = wiki.repo->read_blob(wiki_head, d.path);
      auto change = wiki.repo->last_change(wiki_head, d.path);
      s.commit = change ? CommitRef{change->first, change->second} : commit_ref(wiki_head);
    }
    s.snapshot = snapshot_for_doc(s.commit.timestamp, seq).ordinal;
    auto refs = reference_texts(text, catalog, d);
    s.elements.assign(refs.begin(), refs.end());
    all_elements.insert(refs.begin(), refs.end());
    states.push_back(std::move(s));
  }

  const std::vector<std::string> elements(all_elements.begin(), all_elements.end());
  std::unordered_map<std::string, std::size_t> element_index;
  for (std::size_t i = 0; i < elements.size(); ++i) element_index.emplace(elements[i], i);

  // Count every element at the head and at each distinct snapshot.
  std::set<std::size_t, std::greater<>> needed{head.ordinal};
  for (const auto& s : states) needed.insert(s.snapshot);
  std::vector<std::size_t> order(needed.begin(), needed.end());
  std::vector<std::vector<InstanceCount>> counts(seq.size());
  std::vector<char> done(seq.size(), 0);
  std::optional<InstanceCounter> counter;
  if (!elements.empty()) {
    counter.emplace(elements, config.match);
    done = run_pool(config.source, order, seq.size(), config.jobs, config.deadline,
                    [&](GitRepository& repo, std::size_t i) {
                      counts[i] = counter->count_revision(repo, seq[i], doc_exclusions);
                    });
  } else {
    for (auto i : order) done[i] = 1;
  }
  if (!done[head.ordinal]) result.timed_out = true;

  std::uint64_t pairs = 0;
  std::vector<Finding> findings;
  std::map<std::string, std::size_t> lowest_snapshot;
  for (const auto& s : states) {
    pairs += s.elements.size();
    if (result.timed_out || s.elements.empty()) continue;
    if (!done[s.snapshot]) {
      result.timed_out = true;
      continue;
    }
    for (const auto& e : s.elements) {
      const auto& snap = counts[s.snapshot][element_index.at(e)];
      const auto& cur = counts[head.ordinal][element_index.at(e)];
      if (classify_current(snap, cur) != CurrentStatus::Outdated) continue;
      Finding f;
      f.element = e;
      f.document = s.doc;
      f.document_commit = s.commit;
      f.document_url = config.urls.document_url(s.doc, s.commit.sha);
      f.status = CurrentStatus::Outdated;
      f.snapshot = commit_ref(seq[s.snapshot]);
      f.snapshot_count = snap.count;
      f.current = commit_ref(head);
      f.current_count = cur.count;
      f.evidence = to_evidence(snap, config.urls);
      findings.push_back(std::move(f));
      auto [it, inserted] = lowest_snapshot.emplace(e, s.snapshot);
      if (!inserted) it->second = std::min(it->second, s.snapshot);
    }
  }

  // Locate deletion commits: walk back from the head in batches until each
  // outdated element shows a positive count again.
  std::map<std::string, std::size_t> deletion;
  if (!lowest_snapshot.empty()) {
    std::vector<std::string> pending;
    for (const auto& [e, _] : lowest_snapshot) pending.push_back(e);
    InstanceCounter walker(pending, config.match);
    std::size_t floor = head.ordinal;
    for (const auto& [_, o] : lowest_snapshot) floor = std::min(floor, o);
    const std::size_t batch = std::max<std::size_t>(4, static_cast<std::size_t>(config.jobs) * 4);
    std::size_t top = head.ordinal;  // next ordinal to examine is top - 1
    std::vector<std::vector<InstanceCount>> walk(seq.size());
    while (deletion.size() < pending.size() && top > floor) {
      if (expired(config.deadline)) {
        result.timed_out = true;
        break;
      }
      const std::size_t lo = top > floor + batch ? top - batch : floor;
      auto batch_done = run_pool(config.source, descending(lo, top), seq.size(), config.jobs, config.deadline,
                                 [&](GitRepository& repo, std::size_t i) {
                                   walk[i] = walker.count_revision(repo, seq[i], doc_exclusions);
                                 });
      for (std::size_t i = top; i-- > lo;) {
        if (!batch_done[i]) {
          result.timed_out = true;
          break;
        }
        for (std::size_t k = 0; k < pending.size(); ++k) {
          if (deletion.contains(pending[k]) || walk[i][k].count == 0) continue;
          deletion.emplace(pending[k], i + 1);
        }
        walk[i].clear();
      }
      if (result.timed_out) break;
      top = lo;
    }
    for (auto& w : walker.warnings()) warnings.push_back(std::move(w));
  }
  for (auto& f : findings) {
    auto it = deletion.find(f.element);
    if (it != deletion.end()) f.deletion = commit_ref(seq[it->second]);
  }

  if (counter) {
    for (auto& w : counter->warnings()) warnings.push_back(std::move(w));
  }
  if (result.timed_out) warnings.push_back({"timeout", "", "", "scan deadline reached; report is partial"});
  report.partial = result.timed_out;
  sort_findings(findings);
  report.findings = std::move(findings);
  finalize_warnings(warnings);
  report.warnings = std::move(warnings);
  report.aggregates = compute_aggregates(report.findings, pairs, docs.size(), report.scan_time);
  return result;
}

// ---------------------------------------------------------------------------
// History mode

namespace {

struct DocBlob {
  DocumentDescriptor doc;
  std::string blob;
};

struct BlobRefs {
  std::shared_ptr<const std::string> text;
  std::set<std::string> refs;
};

}  // namespace

PipelineResult run_history(const PipelineConfig& config) {
  config.discovery.validate();
  config.match.validate();
  const RegexCatalog& catalog = catalog_of(config);
  PipelineResult result;
  ScanReport& report = result.report;
  report.project = config.project;
  report.scan_time = config.scan_time;
  report.mode = ReportMode::History;
  std::vector<ScanWarning> warnings;

  auto source = GitRepository::open(config.source);
  const auto seq = source.linearize_history(config.branch, RepoKind::Source);
  const std::size_t n = seq.size();
  report.source_head = commit_ref(seq.head());
  report.revisions_total = n;

  // Wiki: one version per wiki commit.
  WikiState wiki = open_wiki(config, warnings);
  std::vector<std::vector<DocBlob>> wiki_docs_at;
  std::set<DocumentDescriptor> wiki_docs;
  if (wiki.repo && !wiki.sequence.empty()) {
    report.wiki_head = commit_ref(wiki.sequence.head());
    for (const auto& rev : wiki.sequence.revisions) {
      auto tree = wiki.repo->tree_at(rev);
      std::vector<std::string> paths;
      std::unordered_map<std::string, std::string> blobs;
      for (auto& e : tree) {
        paths.push_back(e.path);
        blobs.emplace(e.path, e.blob);
      }
      std::vector<DocBlob> present;
      for (auto& d : discover_documents({}, paths, config.discovery)) {
        wiki_docs.insert(d);
        present.push_back({d, blobs.at(d.path)});
      }
      wiki_docs_at.push_back(std::move(present));
    }
  }

  // Pass 1: source documents at every revision, newest first.
  const bool full_tree = !config.discovery.extra_doc_globs.empty();
  std::vector<std::vector<DocBlob>> source_docs_at(n);
  auto listed = run_pool(config.source, descending(0, n), n, config.jobs, config.deadline,
                         [&](GitRepository& repo, std::size_t i) {
                           auto tree = repo.tree_at(seq[i], full_tree);
                           std::vector<std::string> paths;
                           std::unordered_map<std::string, std::string> blobs;
                           for (auto& e : tree) {
                             paths.push_back(e.path);
                             blobs.emplace(e.path, e.blob);
                           }
                           for (auto& d : discover_documents(paths, std::nullopt, config.discovery)) {
                             source_docs_at[i].push_back({d, blobs.at(d.path)});
                           }
                         });
  const std::size_t k1 = completed_suffix(listed, 0, n);

  std::set<DocumentDescriptor> source_docs;
  for (std::size_t i = k1; i < n; ++i) {
    for (const auto& db : source_docs_at[i]) source_docs.insert(db.doc);
  }
  std::unordered_set<std::string> doc_exclusions;
  for (const auto& d : source_docs) doc_exclusions.insert(d.path);

  // Extract references once per distinct blob.
  std::unordered_map<std::string, BlobRefs> blob_refs;
  auto load = [&](GitRepository& repo, const DocBlob& db) {
    if (blob_refs.contains(db.blob)) return;
    BlobRefs br;
    auto content = repo.read_object(db.blob);
    if (!content) {
      warnings.push_back({"unreadable-blob", db.doc.path, db.blob, "document blob could not be read"});
      content.emplace();
    }
    br.refs = reference_texts(*content, catalog, db.doc);
    br.text = std::make_shared<const std::string>(std::move(*content));
    blob_refs.emplace(db.blob, std::move(br));
  };
  for (std::size_t i = k1; i < n; ++i) {
    for (const auto& db : source_docs_at[i]) load(source, db);
  }
  for (const auto& present : wiki_docs_at) {
    for (const auto& db : present) load(*wiki.repo, db);
  }

  std::vector<DocumentDescriptor> docs(source_docs.begin(), source_docs.end());
  docs.insert(docs.end(), wiki_docs.begin(), wiki_docs.end());
  std::sort(docs.begin(), docs.end());

  // Elements referenced by any version of each document.
  std::map<DocumentDescriptor, std::set<std::string>> doc_elements;
  for (std::size_t i = k1; i < n; ++i) {
    for (const auto& db : source_docs_at[i]) {
      const auto& refs = blob_refs.at(db.blob).refs;
      doc_elements[db.doc].insert(refs.begin(), refs.end());
    }
  }
  for (const auto& present : wiki_docs_at) {
    for (const auto& db : present) {
      const auto& refs = blob_refs.at(db.blob).refs;
      doc_elements[db.doc].insert(refs.begin(), refs.end());
    }
  }
  std::set<std::string> all_elements;
  for (const auto& [_, els] : doc_elements) all_elements.insert(els.begin(), els.end());
  const std::vector<std::string> elements(all_elements.begin(), all_elements.end());
  std::unordered_map<std::string, std::size_t> element_index;
  for (std::size_t i = 0; i < elements.size(); ++i) element_index.emplace(elements[i], i);

  // Pass 2: instance counts at every revision of the listed suffix.
  std::vector<std::vector<std::uint64_t>> counts(n);
  std::vector<char> failed(n, 0);
  std::size_t k2 = k1;
  std::optional<InstanceCounter> counter;
  if (!elements.empty()) {
    counter.emplace(elements, config.match);
    std::mutex warn_mutex;
    auto counted = run_pool(config.source, descending(k1, n), n, config.jobs, config.deadline,
                            [&](GitRepository& repo, std::size_t i) {
                              try {
                                auto tree = repo.tree_at(seq[i]);
                                auto c = counter->count_tree(repo, seq[i], tree, doc_exclusions);
                                counts[i].reserve(c.size());
                                for (const auto& ic : c) counts[i].push_back(ic.count);
                              } catch (const GitError& e) {
                                failed[i] = 1;
                                std::lock_guard lock(warn_mutex);
                                warnings.push_back({"count-failed", "", seq[i].sha, e.what()});
                              }
                            });
    k2 = completed_suffix(counted, k1, n);
  }
  result.timed_out = k1 > 0 || k2 > k1;
  const std::size_t k = k2;

  RevisionSequence window{RepoKind::Source, {seq.revisions.begin() + static_cast<std::ptrdiff_t>(k),
                                             seq.revisions.end()}};
  report.revisions = window.revisions;

  // Timelines.
  std::vector<ElementTimeline> timelines;
  std::vector<Finding> findings;
  for (const auto& doc : docs) {
    std::vector<DocVersion> versions;
    std::vector<LinkedRevision> links;
    if (doc.origin == DocOrigin::Readme) {
      for (std::size_t i = k; i < n; ++i) {
        DocVersion v{doc, seq[i], false, {}, nullptr};
        for (const auto& db : source_docs_at[i]) {
          if (db.doc != doc) continue;
          v.present = true;
          v.blob = db.blob;
          v.text = blob_refs.at(db.blob).text;
        }
        versions.push_back(std::move(v));
      }
      links = link_same_repository(window, versions);
    } else {
      for (std::size_t j = 0; j < wiki.sequence.size(); ++j) {
        DocVersion v{doc, wiki.sequence[j], false, {}, nullptr};
        for (const auto& db : wiki_docs_at[j]) {
          if (db.doc != doc) continue;
          v.present = true;
          v.blob = db.blob;
          v.text = blob_refs.at(db.blob).text;
        }
        versions.push_back(std::move(v));
      }
      std::stable_sort(versions.begin(), versions.end(),
                       [](const DocVersion& a, const DocVersion& b) { return a.timestamp() < b.timestamp(); });
      links = link_source_to_docs(window, versions);
    }

    // The commit that introduced the document's latest content.
    std::optional<CommitRef> doc_commit;
    for (std::size_t v = versions.size(); v-- > 0;) {
      if (!versions[v].present) continue;
      std::size_t first = v;
      while (first > 0 && versions[first - 1].present && versions[first - 1].blob == versions[v].blob) --first;
      doc_commit = commit_ref(versions[first].revision);
      break;
    }

    auto els = doc_elements.find(doc);
    if (els == doc_elements.end()) continue;
    for (const auto& e : els->second) {
      const std::size_t idx = element_index.at(e);
      auto tl = build_timeline(
          e, doc, links, versions,
          [&](const DocVersion& v) { return blob_refs.at(v.blob).refs.contains(e); },
          [&](const Revision& r) -> std::optional<std::uint64_t> {
            if (failed[r.ordinal] || counts[r.ordinal].empty()) return std::nullopt;
            return counts[r.ordinal][idx];
          });
      auto episodes = analyze_timeline(tl, window, config.scan_time, config.episode_rule);
      if (!episodes.empty()) {
        for (auto& ep : episodes) {
          ep.start_ordinal += k;
          if (ep.end_ordinal) *ep.end_ordinal += k;
          if (ep.fix) ep.fix->ordinal += k;
        }
        Finding f;
        f.element = e;
        f.document = doc;
        f.document_commit = doc_commit;
        if (doc_commit) f.document_url = config.urls.document_url(doc, doc_commit->sha);
        f.timeline = render_symbols(tl.symbols);
        f.episodes = std::move(episodes);
        findings.push_back(std::move(f));
      }
      timelines.push_back(std::move(tl));
    }
  }

  // Evidence for ongoing episodes: the last revision with a positive count.
  std::map<std::size_t, std::vector<Finding*>> evidence_at;
  for (auto& f : findings) {
    const auto& last = f.episodes.back();
    if (!last.ongoing()) continue;
    auto symbols = parse_symbols(*f.timeline);
    for (std::size_t i = last.start_ordinal - k; i-- > 0;) {
      if (symbols[i].is_positive()) {
        evidence_at[i + k].push_back(&f);
        break;
      }
    }
  }
  for (const auto& [ordinal, group] : evidence_at) {
    if (expired(config.deadline)) break;
    std::vector<std::string> els;
    for (const Finding* f : group) els.push_back(f->element);
    std::sort(els.begin(), els.end());
    els.erase(std::unique(els.begin(), els.end()), els.end());
    auto c = InstanceCounter(els, config.match).count_revision(source, seq[ordinal], doc_exclusions);
    for (Finding* f : group) {
      auto pos = static_cast<std::size_t>(std::lower_bound(els.begin(), els.end(), f->element) - els.begin());
      f->snapshot = commit_ref(seq[ordinal]);
      f->snapshot_count = c[pos].count;
      f->current = commit_ref(seq.head());
      f->current_count = 0;
      f->deletion = CommitRef{f->episodes.back().start_sha, f->episodes.back().start_timestamp};
      f->evidence = to_evidence(c[pos], config.urls);
    }
  }

  if (counter) {
    for (auto& w : counter->warnings()) warnings.push_back(std::move(w));
  }
  if (result.timed_out) {
    warnings.push_back({"timeout", "", "",
                        "history deadline reached; analyzed " + std::to_string(n - k) + " of " +
                            std::to_string(n) + " revisions"});
  }
  report.partial = result.timed_out;
  sort_findings(findings);
  report.findings = std::move(findings);
  std::stable_sort(timelines.begin(), timelines.end(), [](const ElementTimeline& a, const ElementTimeline& b) {
    if (a.document != b.document) return a.document < b.document;
    return a.element < b.element;
  });
  report.timelines = std::move(timelines);
  finalize_warnings(warnings);
  report.warnings = std::move(warnings);
  report.aggregates = compute_aggregates(report.findings, report.timelines.size(), docs.size(), report.scan_time);
  return result;
}

}  // namespace staledoc
