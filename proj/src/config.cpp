#include "tim/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <json.hpp>

#include "tim/error.hpp"

namespace tim {

namespace {

using nlohmann::json;

std::uint64_t parse_uint(const std::string& value, const std::string& what) {
    try {
        std::size_t consumed = 0;
        if (value.empty() || value[0] == '-') throw std::invalid_argument(value);
        const unsigned long long parsed = std::stoull(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        raise(errc::invalid_parameter, what + " must be a nonnegative integer, got \"" + value +
                                           "\"");
    }
}

std::vector<std::string> parse_relation_list(const std::string& value) {
    std::vector<std::string> out;
    std::string current;
    for (char c : value) {
        if (c == ',') {
            out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    out.push_back(current);
    std::vector<std::string> cleaned;
    for (const std::string& item : out) {
        const std::string norm = normalize_key(item);
        if (!norm.empty()) cleaned.push_back(norm);
    }
    return cleaned;
}

std::uint64_t json_uint(const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) {
        raise(errc::invalid_parameter, "config key \"" + key + "\" must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string json_string(const json& v, const std::string& key) {
    if (!v.is_string()) {
        raise(errc::invalid_parameter, "config key \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        raise(errc::io_error, "cannot open " + path);
    }
    std::ostringstream content;
    content << in.rdbuf();
    return content.str();
}

}  // namespace

AppConfig load_config_file(const std::string& path) {
    AppConfig config;
    const std::string content = read_file(path);
    const json parsed = json::parse(content, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        raise(errc::invalid_parameter, path + " is not a JSON object");
    }
    for (const auto& item : parsed.items()) {
        const std::string& key = item.key();
        const json& value = item.value();
        if (key == "dim") {
            config.dim = static_cast<std::size_t>(json_uint(value, key));
        } else if (key == "buckets") {
            config.buckets = static_cast<std::size_t>(json_uint(value, key));
        } else if (key == "seed") {
            config.seed = json_uint(value, key);
        } else if (key == "top_k") {
            config.top_k = static_cast<std::size_t>(json_uint(value, key));
        } else if (key == "maintain_every") {
            config.maintain_every = static_cast<std::size_t>(json_uint(value, key));
        } else if (key == "probe_depth") {
            config.probe_depth = static_cast<std::size_t>(json_uint(value, key));
        } else if (key == "mode") {
            config.mode = json_string(value, key);
        } else if (key == "functional_relations") {
            if (!value.is_array()) {
                raise(errc::invalid_parameter,
                      "config key \"functional_relations\" must be an array of strings");
            }
            config.functional_relations.clear();
            for (const auto& rel : value) {
                const std::string norm = normalize_key(json_string(rel, key));
                if (norm.empty()) {
                    raise(errc::invalid_parameter, "empty functional relation in config");
                }
                config.functional_relations.push_back(norm);
            }
        } else if (key == "snapshot") {
            config.snapshot = json_string(value, key);
        } else if (key == "prompt_dir") {
            config.prompt_dir = json_string(value, key);
        } else if (key == "session_log") {
            config.session_log = json_string(value, key);
        } else if (key == "embed_endpoint") {
            config.embed_endpoint = json_string(value, key);
        } else if (key == "llm_endpoint") {
            config.llm_endpoint = json_string(value, key);
        } else if (key == "timeout_ms") {
            config.timeout_ms = static_cast<int>(json_uint(value, key));
        } else if (key == "api_key_env") {
            config.api_key_env = json_string(value, key);
        } else {
            raise(errc::invalid_parameter, "unknown config key \"" + key + "\" in " + path);
        }
    }
    return config;
}

void apply_env_overrides(AppConfig& config) {
    auto env = [](const char* name) -> const char* { return std::getenv(name); };

    if (const char* v = env("TIM_DIM")) config.dim = parse_uint(v, "TIM_DIM");
    if (const char* v = env("TIM_BUCKETS")) config.buckets = parse_uint(v, "TIM_BUCKETS");
    if (const char* v = env("TIM_SEED")) config.seed = parse_uint(v, "TIM_SEED");
    if (const char* v = env("TIM_TOP_K")) config.top_k = parse_uint(v, "TIM_TOP_K");
    if (const char* v = env("TIM_MAINTAIN_EVERY"))
        config.maintain_every = parse_uint(v, "TIM_MAINTAIN_EVERY");
    if (const char* v = env("TIM_PROBE_DEPTH"))
        config.probe_depth = parse_uint(v, "TIM_PROBE_DEPTH");
    if (const char* v = env("TIM_MODE")) config.mode = v;
    if (const char* v = env("TIM_FUNCTIONAL_RELATIONS"))
        config.functional_relations = parse_relation_list(v);
    if (const char* v = env("TIM_SNAPSHOT")) config.snapshot = v;
    if (const char* v = env("TIM_PROMPT_DIR")) config.prompt_dir = v;
    if (const char* v = env("TIM_SESSION_LOG")) config.session_log = v;
    if (const char* v = env("TIM_EMBED_ENDPOINT")) config.embed_endpoint = v;
    if (const char* v = env("TIM_LLM_ENDPOINT")) config.llm_endpoint = v;
    if (const char* v = env("TIM_TIMEOUT_MS"))
        config.timeout_ms = static_cast<int>(parse_uint(v, "TIM_TIMEOUT_MS"));
}

void validate(const AppConfig& config) {
    if (config.dim < 8) {
        raise(errc::invalid_parameter, "dim must be >= 8");
    }
    if (config.buckets == 0 || (config.buckets != 1 && config.buckets % 2 != 0)) {
        raise(errc::invalid_parameter, "buckets must be even and >= 2, or 1");
    }
    if (config.top_k < 1) {
        raise(errc::invalid_parameter, "top_k must be >= 1");
    }
    if (config.probe_depth < 1) {
        raise(errc::invalid_parameter, "probe_depth must be >= 1");
    }
    if (config.mode != "rule" && config.mode != "llm") {
        raise(errc::invalid_parameter, "mode must be \"rule\" or \"llm\"");
    }
    if (config.mode == "llm" && config.llm_endpoint.empty()) {
        raise(errc::invalid_parameter, "llm mode requires llm_endpoint");
    }
    if (config.timeout_ms < 1) {
        raise(errc::invalid_parameter, "timeout_ms must be >= 1");
    }
    if (config.snapshot.empty()) {
        raise(errc::invalid_parameter, "snapshot path must be set");
    }
}

ExtractionConfig extraction_config(const AppConfig& config) {
    ExtractionConfig ecfg;
    ecfg.mode = config.mode == "llm" ? ExtractionMode::llm : ExtractionMode::rule;
    for (const std::string& rel : config.functional_relations) {
        ecfg.functional_relations.insert(normalize_key(rel));
    }
    if (!config.prompt_dir.empty()) {
        ecfg.generate_template = read_file(config.prompt_dir + "/generate.txt");
        ecfg.forget_template = read_file(config.prompt_dir + "/forget.txt");
        ecfg.merge_template = read_file(config.prompt_dir + "/merge.txt");
    }
    validate(ecfg);
    return ecfg;
}

PipelineConfig pipeline_config(const AppConfig& config) {
    PipelineConfig pcfg;
    pcfg.top_k = config.top_k;
    pcfg.maintain_every = config.maintain_every;
    pcfg.probe_depth = config.probe_depth;
    if (!config.prompt_dir.empty()) {
        pcfg.answer_template = read_file(config.prompt_dir + "/answer.txt");
    }
    if (pcfg.answer_template.find("{thoughts}") == std::string::npos ||
        pcfg.answer_template.find("{question}") == std::string::npos) {
        raise(errc::invalid_parameter,
              "answer template must contain {thoughts} and {question}");
    }
    return pcfg;
}

LockFile::LockFile(const std::string& guarded_path) : path_(guarded_path + ".lock") {
    for (int attempt = 0; attempt < 2; ++attempt) {
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd >= 0) {
            const std::string pid = std::to_string(::getpid()) + "\n";
            if (::write(fd, pid.data(), pid.size()) < 0) {
                // lock still holds; the pid is advisory
            }
            ::close(fd);
            return;
        }
        if (errno != EEXIST) {
            raise(errc::io_error, "cannot create lock " + path_);
        }
        // lock exists: reclaim it only if its owner is gone
        std::ifstream in(path_);
        long owner = 0;
        if (in >> owner; owner > 0 && ::kill(static_cast<pid_t>(owner), 0) == 0) {
            raise(errc::io_error,
                  path_ + " is held by running process " + std::to_string(owner));
        }
        ::unlink(path_.c_str());
    }
    raise(errc::io_error, "cannot acquire lock " + path_);
}

LockFile::~LockFile() { ::unlink(path_.c_str()); }

}  // namespace tim
