#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tim/memory_store.hpp"
#include "tim/providers.hpp"
#include "tim/thought_ops.hpp"

namespace tim {

// One completed exchange: the user's question Q and the model's (or
// fixture's) response R.
struct ConversationTurn {
    std::uint64_t turn = 0;
    std::string question;
    std::string response;
};

inline constexpr const char kDefaultAnswerTemplate[] =
    "You are an assistant with a long-term memory.\n"
    "Relevant memory:\n"
    "{thoughts}\n"
    "Question: {question}\n"
    "Answer using the memory above when it is relevant.\n";

// Marker substituted into the {thoughts} slot when recall returns nothing.
inline constexpr const char kNoMemoryMarker[] = "(no relevant memory)";

struct PipelineConfig {
    std::size_t top_k = 5;
    std::size_t maintain_every = 10;  // 0 disables periodic maintenance
    std::size_t probe_depth = kDefaultProbeDepth;
    std::string answer_template = kDefaultAnswerTemplate;  // {thoughts}, {question}
};

struct AnswerResult {
    std::string response;
    RecallResult recall;
    std::string prompt;  // the exact text sent to the model, for audit
};

// Stage 1: embed the question, recall the top thoughts, render them into
// the answer prompt (most similar first, one "- <text>" line each), and
// complete. Never mutates the cache.
AnswerResult answer_query(const std::string& question, const MemoryCache& cache,
                          EmbeddingProvider& embedder, LanguageModelProvider& llm,
                          const PipelineConfig& cfg);

// Stage 2: extract thoughts from the completed turn and insert each one,
// embedded from its text. Returns the new ids in insertion order; a turn
// yielding no thoughts returns an empty list.
std::vector<std::uint64_t> post_think(const ConversationTurn& turn, MemoryCache& cache,
                                      EmbeddingProvider& embedder, const ExtractionConfig& ecfg,
                                      LanguageModelProvider* llm = nullptr);

struct MaintenanceReport {
    std::size_t removed = 0;
    std::size_t merged = 0;
    std::map<std::size_t, std::size_t> removed_per_bucket;
    std::map<std::size_t, std::size_t> merged_per_bucket;
    std::vector<std::pair<std::size_t, std::string>> failures;  // (bucket, reason)
    std::size_t passes = 0;
};

// Per-bucket forget-then-merge sweep. A merged thought is re-embedded
// from its merged text and may migrate to another bucket, so rule mode
// repeats the sweep until a pass changes nothing — making the operation
// idempotent. llm mode runs a single pass (completions are not assumed
// stable). A failure inside one bucket is recorded and does not stop the
// sweep of the others.
MaintenanceReport maintain(MemoryCache& cache, EmbeddingProvider& embedder,
                           const ExtractionConfig& ecfg, LanguageModelProvider* llm = nullptr);

}  // namespace tim
