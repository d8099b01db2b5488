#include "tim/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "tim/error.hpp"

namespace tim {

namespace {

std::string format_trace(const RecallResult& recall) {
    std::ostringstream out;
    out << "probed=[";
    for (std::size_t i = 0; i < recall.probed_buckets.size(); ++i) {
        if (i) out << ' ';
        out << recall.probed_buckets[i];
    }
    out << "] comparisons=" << recall.comparisons << " hits=[";
    for (std::size_t i = 0; i < recall.hits.size(); ++i) {
        if (i) out << ' ';
        out << recall.hits[i].thought.id;
    }
    out << ']';
    return out.str();
}

std::string strip_code_prefix(const Error& e) {
    std::string message = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
    return message;
}

}  // namespace

AnswerResult answer_query(const std::string& question, const MemoryCache& cache,
                          EmbeddingProvider& embedder, LanguageModelProvider& llm,
                          const PipelineConfig& cfg) {
    if (cfg.answer_template.find("{thoughts}") == std::string::npos ||
        cfg.answer_template.find("{question}") == std::string::npos) {
        raise(errc::invalid_parameter,
              "answer template must contain {thoughts} and {question}");
    }

    AnswerResult result;
    const EmbeddingVector query = embedder.embed(question);
    result.recall = cache.recall(query, cfg.top_k, cfg.probe_depth);

    std::string thoughts;
    if (result.recall.hits.empty()) {
        thoughts = kNoMemoryMarker;
    } else {
        for (const ScoredThought& hit : result.recall.hits) {
            if (!thoughts.empty()) thoughts.push_back('\n');
            thoughts += "- " + hit.thought.text;
        }
    }
    result.prompt = render_template(cfg.answer_template,
                                    {{"thoughts", thoughts}, {"question", question}});

    try {
        result.response = llm.complete(result.prompt);
    } catch (const Error& e) {
        if (e.code() != errc::provider_failure) throw;
        raise(errc::provider_failure,
              strip_code_prefix(e) + "; recall trace: " + format_trace(result.recall));
    }
    return result;
}

std::vector<std::uint64_t> post_think(const ConversationTurn& turn, MemoryCache& cache,
                                      EmbeddingProvider& embedder, const ExtractionConfig& ecfg,
                                      LanguageModelProvider* llm) {
    const std::vector<TripleCandidate> candidates =
        extract_thoughts(turn.question, turn.response, ecfg, llm);
    std::vector<std::uint64_t> ids;
    ids.reserve(candidates.size());
    for (const TripleCandidate& c : candidates) {
        const EmbeddingVector embedding = embedder.embed(c.text);
        const auto [id, bucket] = cache.insert(c.head, c.relation, c.tail, c.text, turn.turn,
                                               embedding);
        (void)bucket;
        ids.push_back(id);
    }
    return ids;
}

MaintenanceReport maintain(MemoryCache& cache, EmbeddingProvider& embedder,
                           const ExtractionConfig& ecfg, LanguageModelProvider* llm) {
    MaintenanceReport report;
    const bool rule_mode = ecfg.mode == ExtractionMode::rule;

    while (true) {
        ++report.passes;
        std::size_t changes = 0;

        for (std::size_t b = 0; b < cache.bucket_count(); ++b) {
            std::vector<Thought> thoughts;
            for (const StoredThought& s : cache.group(b)) thoughts.push_back(s.thought);
            if (thoughts.empty()) continue;

            try {
                const std::unordered_set<std::uint64_t> doomed =
                    decide_forget(thoughts, ecfg, llm);
                if (!doomed.empty()) {
                    const std::size_t removed = cache.remove(doomed);
                    report.removed += removed;
                    report.removed_per_bucket[b] += removed;
                    changes += removed;
                }

                std::vector<Thought> remaining;
                for (const StoredThought& s : cache.group(b)) remaining.push_back(s.thought);
                if (remaining.empty()) continue;

                for (const MergeInstruction& mi : decide_merge(remaining, ecfg, llm)) {
                    std::unordered_set<std::uint64_t> old_ids(mi.old_ids.begin(),
                                                              mi.old_ids.end());
                    std::uint64_t turn = 0;
                    for (const Thought& t : remaining) {
                        if (old_ids.count(t.id) != 0) turn = std::max(turn, t.turn);
                    }
                    const EmbeddingVector embedding = embedder.embed(mi.text);
                    cache.replace(old_ids, mi.head, mi.relation, mi.tail, mi.text, turn,
                                  embedding);
                    ++report.merged;
                    ++report.merged_per_bucket[b];
                    ++changes;
                }
            } catch (const Error& e) {
                report.failures.emplace_back(b, e.what());
            }
        }

        if (!rule_mode || changes == 0) break;
    }

    std::sort(report.failures.begin(), report.failures.end());
    report.failures.erase(std::unique(report.failures.begin(), report.failures.end()),
                          report.failures.end());
    return report;
}

}  // namespace tim
