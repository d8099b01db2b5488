#include "tim/memory_store.hpp"

#include <algorithm>
#include <cinttypes>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tim/error.hpp"

namespace tim {

namespace {

using nlohmann::json;

std::string trimmed(const std::string& s) {
    const char* ws = " \t\n\r\f\v";
    const std::size_t begin = s.find_first_not_of(ws);
    if (begin == std::string::npos) return "";
    const std::size_t end = s.find_last_not_of(ws);
    return s.substr(begin, end - begin + 1);
}

// Strict JSON-line parse: exactly the given keys, no extras, no omissions.
json parse_record_line(const std::string& line, const std::vector<std::string>& keys,
                       std::size_t line_no) {
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        raise(errc::malformed_record, "line " + std::to_string(line_no) + " is not a JSON object");
    }
    for (const auto& item : parsed.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
            raise(errc::malformed_record, "line " + std::to_string(line_no) +
                                              " has unknown field \"" + item.key() + "\"");
        }
    }
    for (const std::string& key : keys) {
        if (!parsed.contains(key)) {
            raise(errc::malformed_record,
                  "line " + std::to_string(line_no) + " is missing field \"" + key + "\"");
        }
    }
    return parsed;
}

std::uint64_t require_uint(const json& obj, const char* key, std::size_t line_no) {
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        raise(errc::malformed_record, "line " + std::to_string(line_no) + " field \"" + key +
                                          "\" must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string require_text(const json& obj, const char* key, std::size_t line_no) {
    const json& v = obj.at(key);
    if (!v.is_string()) {
        raise(errc::malformed_record,
              "line " + std::to_string(line_no) + " field \"" + key + "\" must be a string");
    }
    std::string s = v.get<std::string>();
    if (trimmed(s).empty()) {
        raise(errc::malformed_record,
              "line " + std::to_string(line_no) + " field \"" + key + "\" is empty");
    }
    return s;
}

}  // namespace

MemoryCache::MemoryCache(ProjectionMatrix proj) : proj_(std::move(proj)) {
    groups_.resize(proj_.buckets());
}

std::size_t MemoryCache::size() const noexcept {
    std::size_t n = 0;
    for (const auto& g : groups_) n += g.size();
    return n;
}

void MemoryCache::check_fields(const std::string& head, const std::string& relation,
                               const std::string& tail, const std::string& text) const {
    if (trimmed(head).empty()) raise(errc::empty_field, "head is empty");
    if (trimmed(relation).empty()) raise(errc::empty_field, "relation is empty");
    if (trimmed(tail).empty()) raise(errc::empty_field, "tail is empty");
    if (trimmed(text).empty()) raise(errc::empty_field, "text is empty");
}

std::pair<std::uint64_t, std::size_t> MemoryCache::insert(const std::string& head,
                                                          const std::string& relation,
                                                          const std::string& tail,
                                                          const std::string& text,
                                                          std::uint64_t turn,
                                                          const EmbeddingVector& embedding) {
    check_fields(head, relation, tail, text);
    const std::size_t bucket = lsh_bucket(embedding, proj_);
    StoredThought stored;
    stored.thought = Thought{next_id_++, head, relation, tail, text, turn, next_ts_++};
    stored.embedding = embedding;
    groups_[bucket].push_back(std::move(stored));
    return {groups_[bucket].back().thought.id, bucket};
}

RecallResult MemoryCache::recall(const EmbeddingVector& query, std::size_t k,
                                 std::size_t probe_depth) const {
    if (k == 0) {
        raise(errc::invalid_k, "k must be >= 1");
    }
    const std::vector<std::size_t> order = probe_order(query, proj_);
    const std::size_t depth = std::min(std::max<std::size_t>(probe_depth, 1), order.size());

    RecallResult result;
    std::vector<ScoredThought> candidates;
    for (std::size_t bucket : order) {
        for (const StoredThought& stored : groups_[bucket]) {
            candidates.push_back({stored.thought, cosine_similarity(query, stored.embedding)});
            ++result.comparisons;
        }
        result.probed_buckets.push_back(bucket);
        if (result.probed_buckets.size() >= depth && candidates.size() >= k) break;
    }

    std::sort(candidates.begin(), candidates.end(),
              [](const ScoredThought& a, const ScoredThought& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.thought.ts < b.thought.ts;
              });
    if (candidates.size() > k) candidates.resize(k);
    result.hits = std::move(candidates);
    return result;
}

std::size_t MemoryCache::remove(const std::unordered_set<std::uint64_t>& ids) {
    std::size_t removed = 0;
    for (auto& g : groups_) {
        auto it = std::remove_if(g.begin(), g.end(), [&ids](const StoredThought& s) {
            return ids.count(s.thought.id) != 0;
        });
        removed += static_cast<std::size_t>(g.end() - it);
        g.erase(it, g.end());
    }
    return removed;
}

std::uint64_t MemoryCache::replace(const std::unordered_set<std::uint64_t>& old_ids,
                                   const std::string& head, const std::string& relation,
                                   const std::string& tail, const std::string& text,
                                   std::uint64_t turn, const EmbeddingVector& embedding) {
    if (old_ids.empty()) {
        raise(errc::missing_id, "replace requires at least one old id");
    }
    std::size_t found = 0;
    for (const auto& g : groups_) {
        for (const StoredThought& s : g) {
            if (old_ids.count(s.thought.id) != 0) ++found;
        }
    }
    if (found != old_ids.size()) {
        for (std::uint64_t id : old_ids) {
            bool present = false;
            for (const auto& g : groups_) {
                for (const StoredThought& s : g) {
                    if (s.thought.id == id) present = true;
                }
            }
            if (!present) {
                raise(errc::missing_id, "thought " + std::to_string(id) + " is not in the cache");
            }
        }
    }
    check_fields(head, relation, tail, text);
    const std::size_t bucket = lsh_bucket(embedding, proj_);  // validates before any mutation

    remove(old_ids);
    StoredThought stored;
    stored.thought = Thought{next_id_++, head, relation, tail, text, turn, next_ts_++};
    stored.embedding = embedding;
    groups_[bucket].push_back(std::move(stored));
    return groups_[bucket].back().thought.id;
}

CacheStats MemoryCache::stats() const {
    CacheStats s;
    s.per_bucket.reserve(groups_.size());
    for (const auto& g : groups_) {
        s.per_bucket.push_back(g.size());
        s.total += g.size();
    }
    return s;
}

bool MemoryCache::audit() const {
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t b = 0; b < groups_.size(); ++b) {
        for (const StoredThought& s : groups_[b]) {
            try {
                if (lsh_bucket(s.embedding, proj_) != b) return false;
            } catch (const Error&) {
                return false;
            }
            if (!seen.insert(s.thought.id).second) return false;
            if (s.thought.id >= next_id_ || s.thought.ts >= next_ts_) return false;
        }
    }
    return true;
}

const std::vector<StoredThought>& MemoryCache::group(std::size_t bucket) const {
    if (bucket >= groups_.size()) {
        raise(errc::invalid_parameter, "bucket " + std::to_string(bucket) + " out of range");
    }
    return groups_[bucket];
}

std::vector<StoredThought> MemoryCache::all() const {
    std::vector<StoredThought> flat;
    flat.reserve(size());
    for (const auto& g : groups_) {
        flat.insert(flat.end(), g.begin(), g.end());
    }
    std::sort(flat.begin(), flat.end(), [](const StoredThought& a, const StoredThought& b) {
        return a.thought.ts < b.thought.ts;
    });
    return flat;
}

std::size_t MemoryCache::save_snapshot(std::ostream& out) const {
    if (proj_.synthetic()) {
        raise(errc::invalid_parameter,
              "snapshots persist only (dim, buckets, seed); a projection built from "
              "injected entries cannot be regenerated on load");
    }
    json header;
    header["version"] = 1;
    header["dim"] = proj_.dim();
    header["buckets"] = proj_.buckets();
    header["seed"] = proj_.seed();
    header["count"] = size();
    out << header.dump() << '\n';

    std::size_t written = 0;
    for (std::size_t b = 0; b < groups_.size(); ++b) {
        for (const StoredThought& s : groups_[b]) {
            json record;
            record["id"] = s.thought.id;
            record["bucket"] = b;
            record["head"] = s.thought.head;
            record["relation"] = s.thought.relation;
            record["tail"] = s.thought.tail;
            record["text"] = s.thought.text;
            record["turn"] = s.thought.turn;
            record["ts"] = s.thought.ts;
            record["embedding"] = s.embedding.values;
            out << record.dump() << '\n';
            ++written;
        }
    }
    if (!out) {
        raise(errc::io_error, "snapshot stream write failed");
    }
    return written;
}

std::size_t MemoryCache::save_snapshot(const std::string& path) const {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    std::size_t written = 0;
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            raise(errc::io_error, "cannot open " + tmp.string() + " for writing");
        }
        written = save_snapshot(out);
        out.flush();
        if (!out) {
            raise(errc::io_error, "write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        raise(errc::io_error, "rename to " + path + " failed: " + ec.message());
    }
    return written;
}

MemoryCache MemoryCache::load_snapshot(std::istream& in,
                                       const std::optional<SnapshotConfig>& expected) {
    std::string line;
    if (!std::getline(in, line)) {
        raise(errc::malformed_record, "snapshot is empty (missing header)");
    }
    const json header =
        parse_record_line(line, {"version", "dim", "buckets", "seed", "count"}, 1);
    const std::uint64_t version = require_uint(header, "version", 1);
    if (version != 1) {
        raise(errc::version_mismatch,
              "snapshot version " + std::to_string(version) + ", expected 1");
    }
    const std::uint64_t dim = require_uint(header, "dim", 1);
    const std::uint64_t buckets = require_uint(header, "buckets", 1);
    const std::uint64_t seed = require_uint(header, "seed", 1);
    const std::uint64_t count = require_uint(header, "count", 1);

    if (expected) {
        if (expected->dim != dim || expected->buckets != buckets || expected->seed != seed) {
            std::ostringstream msg;
            msg << "snapshot has (dim=" << dim << ", buckets=" << buckets << ", seed=" << seed
                << "), configuration expects (dim=" << expected->dim
                << ", buckets=" << expected->buckets << ", seed=" << expected->seed << ")";
            raise(errc::config_mismatch, msg.str());
        }
    }

    ProjectionMatrix proj = [&] {
        try {
            return ProjectionMatrix::generate(static_cast<std::size_t>(dim),
                                              static_cast<std::size_t>(buckets), seed);
        } catch (const Error& e) {
            raise(errc::malformed_record, std::string("invalid header geometry: ") + e.what());
        }
    }();
    MemoryCache cache(std::move(proj));

    static const std::vector<std::string> kRecordKeys = {
        "id", "bucket", "head", "relation", "tail", "text", "turn", "ts", "embedding"};
    std::unordered_set<std::uint64_t> seen_ids;
    std::size_t records = 0;
    std::size_t line_no = 1;
    std::uint64_t max_id = 0, max_ts = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json record = parse_record_line(line, kRecordKeys, line_no);
        const std::uint64_t id = require_uint(record, "id", line_no);
        const std::uint64_t bucket = require_uint(record, "bucket", line_no);
        Thought t;
        t.id = id;
        t.head = require_text(record, "head", line_no);
        t.relation = require_text(record, "relation", line_no);
        t.tail = require_text(record, "tail", line_no);
        t.text = require_text(record, "text", line_no);
        t.turn = require_uint(record, "turn", line_no);
        t.ts = require_uint(record, "ts", line_no);

        const json& emb = record.at("embedding");
        if (!emb.is_array() || emb.size() != dim) {
            raise(errc::malformed_record, "line " + std::to_string(line_no) +
                                              " embedding must be an array of " +
                                              std::to_string(dim) + " numbers");
        }
        EmbeddingVector v;
        v.values.reserve(emb.size());
        for (const auto& item : emb) {
            if (!item.is_number()) {
                raise(errc::malformed_record,
                      "line " + std::to_string(line_no) + " embedding entry is not a number");
            }
            v.values.push_back(item.get<double>());
        }
        if (!all_finite(v)) {
            raise(errc::malformed_record,
                  "line " + std::to_string(line_no) + " embedding has a non-finite entry");
        }

        if (bucket >= buckets) {
            raise(errc::malformed_record, "line " + std::to_string(line_no) + " bucket " +
                                              std::to_string(bucket) + " out of range");
        }
        if (!seen_ids.insert(id).second) {
            raise(errc::malformed_record,
                  "duplicate thought id " + std::to_string(id) + " at line " +
                      std::to_string(line_no));
        }

        std::size_t expected_bucket = 0;
        try {
            expected_bucket = lsh_bucket(v, cache.proj_);
        } catch (const Error& e) {
            raise(errc::malformed_record, "line " + std::to_string(line_no) +
                                              " embedding is not hashable: " + e.what());
        }
        if (expected_bucket != bucket) {
            raise(errc::integrity_failure,
                  "thought " + std::to_string(id) + " is recorded in bucket " +
                      std::to_string(bucket) + " but its embedding hashes to bucket " +
                      std::to_string(expected_bucket));
        }

        max_id = std::max(max_id, id);
        max_ts = std::max(max_ts, t.ts);
        cache.groups_[bucket].push_back({std::move(t), std::move(v)});
        ++records;
    }
    if (records != count) {
        raise(errc::malformed_record, "header count " + std::to_string(count) + " but " +
                                          std::to_string(records) + " records present");
    }
    if (records > 0) {
        cache.next_id_ = max_id + 1;
        cache.next_ts_ = max_ts + 1;
    }
    return cache;
}

MemoryCache MemoryCache::load_snapshot(const std::string& path,
                                       const std::optional<SnapshotConfig>& expected) {
    std::ifstream in(path);
    if (!in) {
        raise(errc::io_error, "cannot open snapshot " + path);
    }
    return load_snapshot(in, expected);
}

}  // namespace tim
