#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tim/pipeline.hpp"
#include "tim/thought_ops.hpp"

namespace tim {

// Effective settings for one invocation. Precedence: command-line flag,
// then TIM_* environment variable, then config file, then these defaults.
struct AppConfig {
    std::size_t dim = 64;
    std::size_t buckets = 16;
    std::uint64_t seed = 42;
    std::size_t top_k = 5;
    std::size_t maintain_every = 10;  // 0 disables periodic maintenance
    std::size_t probe_depth = kDefaultProbeDepth;
    std::string mode = "rule";  // "rule" or "llm"
    std::vector<std::string> functional_relations = {"lives_in"};
    std::string snapshot = "tim_snapshot.jsonl";
    std::string prompt_dir;  // empty: use the built-in templates
    std::string session_log = "tim_session.jsonl";
    std::string embed_endpoint;  // empty: hashed embedder
    std::string llm_endpoint;    // required for llm mode
    int timeout_ms = 5000;
    std::string api_key_env = "TIM_API_KEY";
};

// Strict flat-JSON config file: unknown keys and wrong types are errors.
AppConfig load_config_file(const std::string& path);

// Applies TIM_DIM, TIM_BUCKETS, TIM_SEED, TIM_TOP_K, TIM_MAINTAIN_EVERY,
// TIM_PROBE_DEPTH, TIM_MODE, TIM_FUNCTIONAL_RELATIONS (comma-separated),
// TIM_SNAPSHOT, TIM_PROMPT_DIR, TIM_SESSION_LOG, TIM_EMBED_ENDPOINT,
// TIM_LLM_ENDPOINT and TIM_TIMEOUT_MS on top of `config`.
void apply_env_overrides(AppConfig& config);

// Bounds and consistency checks on the merged configuration.
void validate(const AppConfig& config);

// Materialized policy objects. Template files are read from prompt_dir
// when it is set (generate.txt / forget.txt / merge.txt / answer.txt);
// otherwise the built-in defaults apply.
ExtractionConfig extraction_config(const AppConfig& config);
PipelineConfig pipeline_config(const AppConfig& config);

// Advisory per-snapshot lock: created on construction, removed on
// destruction. A live lock held by another process is an error; a lock
// left by a dead process is silently reclaimed.
class LockFile {
public:
    explicit LockFile(const std::string& guarded_path);
    ~LockFile();

    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::string path_;
};

}  // namespace tim
