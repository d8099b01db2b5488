#include "tim/thought_ops.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

#include "tim/error.hpp"

namespace tim {

namespace {

std::string trim(std::string_view s) {
    const char* ws = " \t\n\r\f\v";
    const std::size_t begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return "";
    const std::size_t end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::string current;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(s);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(s.substr(start));
            return parts;
        }
        parts.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string render_triple_text(const std::string& head, const std::string& relation,
                               const std::string& tail) {
    return head + " " + relation + " " + tail;
}

void require_placeholder(const std::string& tpl, const char* name, const char* placeholder) {
    if (tpl.find(placeholder) == std::string::npos) {
        raise(errc::invalid_parameter,
              std::string(name) + " template is missing the " + placeholder + " placeholder");
    }
}

LanguageModelProvider& require_llm(LanguageModelProvider* llm) {
    if (llm == nullptr) {
        raise(errc::invalid_parameter, "llm mode requires a language-model provider");
    }
    return *llm;
}

// One prompt line per thought so the model can cite ids back.
std::string render_group(const std::vector<Thought>& group) {
    std::string out;
    for (const Thought& t : group) {
        out += "id=" + std::to_string(t.id) + " ts=" + std::to_string(t.ts) + " " + t.head +
               " | " + t.relation + " | " + t.tail + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::optional<std::uint64_t> first_integer(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && !std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size()) return std::nullopt;
    std::uint64_t value = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
        value = value * 10 + static_cast<std::uint64_t>(line[i] - '0');
        ++i;
    }
    return value;
}

// Thoughts grouped by normalized (head, relation), preserving ts order
// within each key. std::map keeps emission order deterministic.
using KeyedGroups = std::map<std::pair<std::string, std::string>, std::vector<const Thought*>>;

KeyedGroups group_by_key(const std::vector<Thought>& group) {
    KeyedGroups keyed;
    for (const Thought& t : group) {
        keyed[{normalize_key(t.head), normalize_key(t.relation)}].push_back(&t);
    }
    for (auto& [key, members] : keyed) {
        std::sort(members.begin(), members.end(),
                  [](const Thought* a, const Thought* b) { return a->ts < b->ts; });
    }
    return keyed;
}

}  // namespace

std::string normalize_key(std::string_view s) {
    std::string out = trim(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

void validate(const ExtractionConfig& cfg) {
    require_placeholder(cfg.generate_template, "generate", "{question}");
    require_placeholder(cfg.generate_template, "generate", "{response}");
    require_placeholder(cfg.forget_template, "forget", "{thoughts}");
    require_placeholder(cfg.merge_template, "merge", "{thoughts}");
    for (const std::string& rel : cfg.functional_relations) {
        if (rel.empty() || rel != normalize_key(rel)) {
            raise(errc::invalid_parameter,
                  "functional relation \"" + rel + "\" must be lowercase and trimmed");
        }
    }
}

std::string render_template(std::string_view tpl,
                            const std::vector<std::pair<std::string, std::string>>& subs) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        std::size_t best = std::string_view::npos;
        const std::pair<std::string, std::string>* hit = nullptr;
        for (const auto& sub : subs) {
            const std::string token = "{" + sub.first + "}";
            const std::size_t found = tpl.find(token, pos);
            if (found < best) {
                best = found;
                hit = &sub;
            }
        }
        if (hit == nullptr) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, best - pos));
        out.append(hit->second);
        pos = best + hit->first.size() + 2;
    }
    return out;
}

std::vector<TripleCandidate> extract_thoughts(const std::string& question,
                                              const std::string& response,
                                              const ExtractionConfig& cfg,
                                              LanguageModelProvider* llm) {
    std::vector<TripleCandidate> found;

    if (cfg.mode == ExtractionMode::rule) {
        std::string sentence;
        auto flush = [&] {
            const std::vector<std::string> tokens = split_whitespace(sentence);
            if (tokens.size() == 3) {
                found.push_back({tokens[0], tokens[1], tokens[2],
                                 render_triple_text(tokens[0], tokens[1], tokens[2])});
            }
            sentence.clear();
        };
        for (char c : response) {
            if (c == '.' || c == '!' || c == '?') {
                flush();
            } else {
                sentence.push_back(c);
            }
        }
        flush();
        return found;
    }

    validate(cfg);
    const std::string prompt = render_template(
        cfg.generate_template, {{"question", question}, {"response", response}});
    const std::string completion = require_llm(llm).complete(prompt);
    for (const std::string& line : split_lines(completion)) {
        const std::vector<std::string> parts = split_on(line, '|');
        if (parts.size() != 3) continue;
        const std::string head = trim(parts[0]);
        const std::string relation = trim(parts[1]);
        const std::string tail = trim(parts[2]);
        if (head.empty() || relation.empty() || tail.empty()) continue;
        found.push_back({head, relation, tail, render_triple_text(head, relation, tail)});
    }
    return found;
}

std::unordered_set<std::uint64_t> decide_forget(const std::vector<Thought>& group,
                                                const ExtractionConfig& cfg,
                                                LanguageModelProvider* llm) {
    std::unordered_set<std::uint64_t> doomed;

    if (cfg.mode == ExtractionMode::rule) {
        for (const auto& [key, members] : group_by_key(group)) {
            if (cfg.functional_relations.count(key.second) == 0) continue;
            std::set<std::string> tails;
            for (const Thought* t : members) tails.insert(normalize_key(t->tail));
            if (tails.size() < 2) continue;
            // members are ts-ascending; everything but the newest goes
            for (std::size_t i = 0; i + 1 < members.size(); ++i) {
                doomed.insert(members[i]->id);
            }
        }
        return doomed;
    }

    validate(cfg);
    const std::string prompt =
        render_template(cfg.forget_template, {{"thoughts", render_group(group)}});
    const std::string completion = require_llm(llm).complete(prompt);
    std::unordered_set<std::uint64_t> group_ids;
    for (const Thought& t : group) group_ids.insert(t.id);
    for (const std::string& line : split_lines(completion)) {
        const std::optional<std::uint64_t> id = first_integer(line);
        if (id && group_ids.count(*id) != 0) doomed.insert(*id);
    }
    return doomed;
}

std::vector<MergeInstruction> decide_merge(const std::vector<Thought>& group,
                                           const ExtractionConfig& cfg,
                                           LanguageModelProvider* llm) {
    std::vector<MergeInstruction> instructions;

    if (cfg.mode == ExtractionMode::rule) {
        for (const auto& [key, members] : group_by_key(group)) {
            if (cfg.functional_relations.count(key.second) != 0) continue;
            if (members.size() < 2) continue;

            MergeInstruction mi;
            for (const Thought* t : members) mi.old_ids.push_back(t->id);
            std::sort(mi.old_ids.begin(), mi.old_ids.end());

            // one surface form per distinct normalized tail, first seen wins
            std::set<std::string> seen;
            std::vector<std::string> tails;
            for (const Thought* t : members) {
                const std::string norm = normalize_key(t->tail);
                if (seen.insert(norm).second) tails.push_back(trim(t->tail));
            }
            std::sort(tails.begin(), tails.end());

            mi.head = trim(members.front()->head);
            mi.relation = trim(members.front()->relation);
            std::string joined;
            for (const std::string& t : tails) {
                if (!joined.empty()) joined += "; ";
                joined += t;
            }
            mi.tail = joined;
            mi.text = render_triple_text(mi.head, mi.relation, mi.tail);
            instructions.push_back(std::move(mi));
        }
        return instructions;
    }

    validate(cfg);
    const std::string prompt =
        render_template(cfg.merge_template, {{"thoughts", render_group(group)}});
    const std::string completion = require_llm(llm).complete(prompt);
    std::unordered_set<std::uint64_t> group_ids;
    for (const Thought& t : group) group_ids.insert(t.id);
    std::unordered_set<std::uint64_t> consumed;
    for (const std::string& line : split_lines(completion)) {
        const std::vector<std::string> parts = split_on(line, '|');
        if (parts.size() != 4) continue;
        std::string ids_part = trim(parts[0]);
        if (ids_part.rfind("ids=", 0) == 0) ids_part = ids_part.substr(4);

        std::vector<std::uint64_t> ids;
        bool ok = true;
        for (const std::string& token : split_on(ids_part, ',')) {
            const std::string t = trim(token);
            if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) {
                    return std::isdigit(c);
                })) {
                ok = false;
                break;
            }
            ids.push_back(std::stoull(t));
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        if (!ok || ids.size() < 2) continue;
        for (std::uint64_t id : ids) {
            if (group_ids.count(id) == 0 || consumed.count(id) != 0) ok = false;
        }
        if (!ok) continue;

        MergeInstruction mi;
        mi.old_ids = std::move(ids);
        mi.head = trim(parts[1]);
        mi.relation = trim(parts[2]);
        mi.tail = trim(parts[3]);
        if (mi.head.empty() || mi.relation.empty() || mi.tail.empty()) continue;
        mi.text = render_triple_text(mi.head, mi.relation, mi.tail);
        for (std::uint64_t id : mi.old_ids) consumed.insert(id);
        instructions.push_back(std::move(mi));
    }
    return instructions;
}

}  // namespace tim
