#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tim/embedding.hpp"
#include "tim/lsh.hpp"

namespace tim {

// One inductive thought: a (head, relation, tail) triple plus its surface
// sentence and provenance. `ts` is the logical insertion counter that
// orders thoughts and breaks score ties.
struct Thought {
    std::uint64_t id = 0;
    std::string head;
    std::string relation;
    std::string tail;
    std::string text;
    std::uint64_t turn = 0;
    std::uint64_t ts = 0;

    bool operator==(const Thought& other) const = default;
};

struct StoredThought {
    Thought thought;
    EmbeddingVector embedding;

    bool operator==(const StoredThought& other) const = default;
};

struct ScoredThought {
    Thought thought;
    double score = 0.0;
};

struct RecallResult {
    std::vector<ScoredThought> hits;        // descending score, ties by ascending ts
    std::vector<std::size_t> probed_buckets;
    std::size_t comparisons = 0;            // pairs examined across probed buckets
};

struct CacheStats {
    std::vector<std::size_t> per_bucket;
    std::size_t total = 0;
};

// How many buckets recall scans before the candidate-count stop rule may
// fire. Probing only the single nearest bucket retrieves the true nearest
// neighbor no more often than the hash collides, which is far too lossy;
// four probes push the miss rate into the noise at desk scale while still
// touching a small fraction of the cache.
inline constexpr std::size_t kDefaultProbeDepth = 4;

// The memory cache M: `buckets` groups of (thought, embedding) pairs, each
// pair living in the group named by the LSH hash of its embedding.
//
// Concurrency: any number of concurrent readers (recall/stats/audit/...)
// OR exactly one writer (insert/remove/replace/load). Synchronization is
// the caller's job.
class MemoryCache {
public:
    explicit MemoryCache(ProjectionMatrix proj);

    const ProjectionMatrix& projection() const noexcept { return proj_; }
    std::size_t bucket_count() const noexcept { return groups_.size(); }
    std::size_t size() const noexcept;

    // Appends a thought; id and ts come from the cache's counters.
    // Returns (id, bucket).
    std::pair<std::uint64_t, std::size_t> insert(const std::string& head,
                                                 const std::string& relation,
                                                 const std::string& tail,
                                                 const std::string& text, std::uint64_t turn,
                                                 const EmbeddingVector& embedding);

    // Two-stage retrieval. Stage 1 orders buckets by projection score;
    // Stage 2 scans buckets in that order, scoring every resident pair by
    // cosine similarity, and stops at the first bucket boundary at which
    // at least min(probe_depth, bucket_count) buckets have been scanned
    // and at least k candidates are in hand. Returns the top k candidates
    // by (score desc, ts asc), fewer if the cache holds fewer.
    RecallResult recall(const EmbeddingVector& query, std::size_t k,
                        std::size_t probe_depth = kDefaultProbeDepth) const;

    // Deletes every thought whose id is in `ids`; absent ids are ignored.
    // Returns the number actually removed.
    std::size_t remove(const std::unordered_set<std::uint64_t>& ids);

    // Atomically swaps the thoughts in `old_ids` for one merged thought
    // (fresh id and ts). Nothing changes if any id is absent.
    std::uint64_t replace(const std::unordered_set<std::uint64_t>& old_ids,
                          const std::string& head, const std::string& relation,
                          const std::string& tail, const std::string& text, std::uint64_t turn,
                          const EmbeddingVector& embedding);

    CacheStats stats() const;

    // Placement check: every stored pair sits in the group matching the
    // hash of its embedding, ids are unique, and ts values respect the
    // counter. Returns false on any violation.
    bool audit() const;

    const std::vector<StoredThought>& group(std::size_t bucket) const;

    // Every stored pair, ordered by ascending ts (insertion order).
    std::vector<StoredThought> all() const;

    // Snapshot I/O. The stream form writes/reads the JSONL snapshot; the
    // path form additionally makes the write atomic (temp file + rename).
    // Saving requires a seed-reproducible projection: injected-entry
    // matrices cannot be regenerated on load and are refused.
    std::size_t save_snapshot(std::ostream& out) const;
    std::size_t save_snapshot(const std::string& path) const;

    struct SnapshotConfig {
        std::size_t dim = 0;
        std::size_t buckets = 0;
        std::uint64_t seed = 0;
    };

    static MemoryCache load_snapshot(std::istream& in,
                                     const std::optional<SnapshotConfig>& expected = {});
    static MemoryCache load_snapshot(const std::string& path,
                                     const std::optional<SnapshotConfig>& expected = {});

    // Field-for-field equality of projection and stored contents. The id
    // and ts counters are administrative and excluded: a reloaded cache
    // may sit at lower counters than its source if the newest thoughts
    // had been removed before saving.
    bool operator==(const MemoryCache& other) const {
        return proj_ == other.proj_ && groups_ == other.groups_;
    }

private:
    void check_fields(const std::string& head, const std::string& relation,
                      const std::string& tail, const std::string& text) const;

    ProjectionMatrix proj_;
    std::vector<std::vector<StoredThought>> groups_;
    std::uint64_t next_id_ = 0;
    std::uint64_t next_ts_ = 0;
};

}  // namespace tim
