#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tim/memory_store.hpp"
#include "tim/providers.hpp"

namespace tim {

enum class ExtractionMode { rule, llm };

// Shipped prompt wording; the prompts/ directory carries the same text as
// editable files. Operators may swap any of them as long as the required
// placeholders survive.
inline constexpr const char kDefaultGenerateTemplate[] =
    "Extract relation triples from this exchange.\n"
    "Question: {question}\n"
    "Response: {response}\n"
    "Return one triple per line in the form: head | relation | tail\n"
    "Return nothing if no clear relation is stated.\n";

inline constexpr const char kDefaultForgetTemplate[] =
    "These memory entries may contain stale or contradictory facts.\n"
    "{thoughts}\n"
    "List the ids of entries to remove, one id per line.\n"
    "Return nothing if every entry should be kept.\n";

inline constexpr const char kDefaultMergeTemplate[] =
    "These memory entries may describe the same fact.\n"
    "{thoughts}\n"
    "For each set of entries to combine, return one line in the form:\n"
    "ids=<comma-separated ids> | head | relation | tail\n"
    "Return nothing if no entries should be combined.\n";

// Policy knobs for extraction and maintenance. `rule` mode is fully
// deterministic and needs no model; `llm` mode renders the templates and
// parses completions defensively.
struct ExtractionConfig {
    ExtractionMode mode = ExtractionMode::rule;

    // Relations admitting at most one true tail per head. Two thoughts
    // sharing (head, functional relation) but not tail contradict each
    // other and the older one is forgotten. Entries must be lowercase
    // and trimmed.
    std::set<std::string> functional_relations;

    std::string generate_template = kDefaultGenerateTemplate;  // {question}, {response}
    std::string forget_template = kDefaultForgetTemplate;      // {thoughts}
    std::string merge_template = kDefaultMergeTemplate;        // {thoughts}
};

// Raises invalid-parameter if a template lacks a required placeholder or
// a functional relation is not in normal form.
void validate(const ExtractionConfig& cfg);

// Lowercased, whitespace-trimmed form used for all entity and relation
// comparisons.
std::string normalize_key(std::string_view s);

// Left-to-right single-pass placeholder substitution. Substituted values
// are never re-scanned, so a value containing "{question}" stays literal.
std::string render_template(std::string_view tpl,
                            const std::vector<std::pair<std::string, std::string>>& subs);

struct TripleCandidate {
    std::string head;
    std::string relation;
    std::string tail;
    std::string text;

    bool operator==(const TripleCandidate& other) const = default;
};

struct MergeInstruction {
    std::vector<std::uint64_t> old_ids;  // ascending
    std::string head;
    std::string relation;
    std::string tail;
    std::string text;
};

// Candidate thoughts from one Q-R exchange. Rule mode parses the response
// with the sentence grammar (every sentence of exactly three
// whitespace-separated tokens is a triple); llm mode prompts the provider
// and keeps only well-formed "head | relation | tail" lines.
std::vector<TripleCandidate> extract_thoughts(const std::string& question,
                                              const std::string& response,
                                              const ExtractionConfig& cfg,
                                              LanguageModelProvider* llm = nullptr);

// Ids to remove from one bucket's thoughts. Rule mode removes every
// thought except the newest for each (head, functional relation) with
// more than one distinct tail. Both modes only ever return ids present
// in `group`.
std::unordered_set<std::uint64_t> decide_forget(const std::vector<Thought>& group,
                                                const ExtractionConfig& cfg,
                                                LanguageModelProvider* llm = nullptr);

// Merge plans for one bucket's thoughts. Rule mode combines all thoughts
// sharing (head, non-functional relation) into one, joining distinct
// tails with "; " in lexicographic order. Both modes drop instructions
// referencing ids outside `group`.
std::vector<MergeInstruction> decide_merge(const std::vector<Thought>& group,
                                           const ExtractionConfig& cfg,
                                           LanguageModelProvider* llm = nullptr);

}  // namespace tim
