#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tim/config.hpp"
#include "tim/error.hpp"

using tim::AppConfig;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tim_config_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::string write(const std::string& name, const std::string& content) const {
        auto p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

// Clears every TIM_ variable the loader reads, restoring nothing: tests
// set what they need explicitly.
void clear_env() {
    for (const char* name :
         {"TIM_DIM", "TIM_BUCKETS", "TIM_SEED", "TIM_TOP_K", "TIM_MAINTAIN_EVERY",
          "TIM_PROBE_DEPTH", "TIM_MODE", "TIM_FUNCTIONAL_RELATIONS", "TIM_SNAPSHOT",
          "TIM_PROMPT_DIR", "TIM_SESSION_LOG", "TIM_EMBED_ENDPOINT", "TIM_LLM_ENDPOINT",
          "TIM_TIMEOUT_MS"}) {
        unsetenv(name);
    }
}

}  // namespace

TEST_CASE("defaults validate") {
    AppConfig cfg;
    CHECK_NOTHROW(tim::validate(cfg));
    CHECK(cfg.dim == 64);
    CHECK(cfg.buckets == 16);
    CHECK(cfg.mode == "rule");
}

TEST_CASE("config file overrides defaults and rejects junk") {
    TempDir dir;

    SUBCASE("well-formed file") {
        auto path = dir.write("tim.json", R"({
            "dim": 32,
            "buckets": 8,
            "seed": 7,
            "top_k": 3,
            "mode": "rule",
            "functional_relations": ["lives_in", "works_at"],
            "snapshot": "mem.jsonl",
            "timeout_ms": 750
        })");
        auto cfg = tim::load_config_file(path);
        CHECK(cfg.dim == 32);
        CHECK(cfg.buckets == 8);
        CHECK(cfg.seed == 7);
        CHECK(cfg.top_k == 3);
        CHECK(cfg.functional_relations == std::vector<std::string>{"lives_in", "works_at"});
        CHECK(cfg.snapshot == "mem.jsonl");
        CHECK(cfg.timeout_ms == 750);
        // Untouched keys keep their defaults.
        CHECK(cfg.maintain_every == 10);
    }
    SUBCASE("unknown key") {
        auto path = dir.write("bad.json", R"({"dmi": 32})");
        CHECK_THROWS_AS(tim::load_config_file(path), tim::Error);
    }
    SUBCASE("wrong type") {
        auto path = dir.write("bad.json", R"({"dim": "many"})");
        CHECK_THROWS_AS(tim::load_config_file(path), tim::Error);
    }
    SUBCASE("not json") {
        auto path = dir.write("bad.json", "dim = 32");
        CHECK_THROWS_AS(tim::load_config_file(path), tim::Error);
    }
    SUBCASE("missing file") {
        try {
            tim::load_config_file((dir.path / "absent.json").string());
            FAIL("expected error");
        } catch (const tim::Error& e) {
            CHECK(e.code() == tim::errc::io_error);
        }
    }
}

TEST_CASE("environment overrides sit between file and flags") {
    clear_env();
    AppConfig cfg;
    setenv("TIM_DIM", "128", 1);
    setenv("TIM_MODE", "llm", 1);
    setenv("TIM_FUNCTIONAL_RELATIONS", "born_in, lives_in", 1);
    setenv("TIM_TIMEOUT_MS", "250", 1);
    tim::apply_env_overrides(cfg);
    CHECK(cfg.dim == 128);
    CHECK(cfg.mode == "llm");
    CHECK(cfg.functional_relations == std::vector<std::string>{"born_in", "lives_in"});
    CHECK(cfg.timeout_ms == 250);
    CHECK(cfg.buckets == 16);  // untouched

    SUBCASE("malformed numeric values are errors") {
        setenv("TIM_DIM", "sixty-four", 1);
        AppConfig fresh;
        CHECK_THROWS_AS(tim::apply_env_overrides(fresh), tim::Error);
    }
    clear_env();
}

TEST_CASE("validate enforces bounds and llm prerequisites") {
    AppConfig cfg;

    SUBCASE("dim floor") {
        cfg.dim = 4;
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
    }
    SUBCASE("buckets parity") {
        cfg.buckets = 5;
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
        cfg.buckets = 1;  // degenerate single bucket is allowed
        CHECK_NOTHROW(tim::validate(cfg));
        cfg.buckets = 0;
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
    }
    SUBCASE("top_k and probe_depth floors") {
        cfg.top_k = 0;
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
        cfg = AppConfig{};
        cfg.probe_depth = 0;
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
    }
    SUBCASE("mode values") {
        cfg.mode = "auto";
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
    }
    SUBCASE("llm mode requires an endpoint") {
        cfg.mode = "llm";
        cfg.llm_endpoint = "";
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
        cfg.llm_endpoint = "http://127.0.0.1:9999/llm";
        CHECK_NOTHROW(tim::validate(cfg));
    }
    SUBCASE("snapshot path required") {
        cfg.snapshot = "";
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
    }
    SUBCASE("timeout floor") {
        cfg.timeout_ms = 0;
        CHECK_THROWS_AS(tim::validate(cfg), tim::Error);
    }
}

TEST_CASE("extraction_config and pipeline_config materialize settings") {
    AppConfig cfg;
    cfg.functional_relations = {"lives_in", "works_at"};
    cfg.top_k = 7;
    cfg.maintain_every = 3;
    cfg.probe_depth = 2;

    auto ecfg = tim::extraction_config(cfg);
    CHECK(ecfg.mode == tim::ExtractionMode::rule);
    CHECK(ecfg.functional_relations == std::set<std::string>{"lives_in", "works_at"});
    CHECK(ecfg.generate_template == tim::kDefaultGenerateTemplate);

    auto pcfg = tim::pipeline_config(cfg);
    CHECK(pcfg.top_k == 7);
    CHECK(pcfg.maintain_every == 3);
    CHECK(pcfg.probe_depth == 2);
    CHECK(pcfg.answer_template == tim::kDefaultAnswerTemplate);
}

TEST_CASE("prompt_dir swaps in template files") {
    TempDir dir;
    AppConfig cfg;
    cfg.prompt_dir = dir.path.string();

    SUBCASE("all four present") {
        dir.write("generate.txt", "G {question} {response}");
        dir.write("forget.txt", "F {thoughts}");
        dir.write("merge.txt", "M {thoughts}");
        dir.write("answer.txt", "A {thoughts} {question}");
        auto ecfg = tim::extraction_config(cfg);
        CHECK(ecfg.generate_template == "G {question} {response}");
        CHECK(ecfg.forget_template == "F {thoughts}");
        CHECK(ecfg.merge_template == "M {thoughts}");
        auto pcfg = tim::pipeline_config(cfg);
        CHECK(pcfg.answer_template == "A {thoughts} {question}");
    }
    SUBCASE("template missing its placeholder") {
        dir.write("generate.txt", "no placeholders");
        dir.write("forget.txt", "F {thoughts}");
        dir.write("merge.txt", "M {thoughts}");
        CHECK_THROWS_AS(tim::extraction_config(cfg), tim::Error);
    }
    SUBCASE("file missing") {
        CHECK_THROWS_AS(tim::extraction_config(cfg), tim::Error);
    }
}

TEST_CASE("lock file excludes live holders and reclaims stale ones") {
    TempDir dir;
    std::string guarded = (dir.path / "snap.jsonl").string();

    SUBCASE("create, hold, release") {
        {
            tim::LockFile lock(guarded);
            CHECK(std::filesystem::exists(guarded + ".lock"));
            // A second lock in the same (live) process must fail.
            CHECK_THROWS_AS(tim::LockFile{guarded}, tim::Error);
        }
        CHECK_FALSE(std::filesystem::exists(guarded + ".lock"));
    }
    SUBCASE("stale lock from a dead pid is reclaimed") {
        {
            std::ofstream out(guarded + ".lock");
            out << 999999999 << "\n";  // beyond pid_max: no such process
        }
        CHECK_NOTHROW(tim::LockFile{guarded});
        CHECK_FALSE(std::filesystem::exists(guarded + ".lock"));
    }
    SUBCASE("garbage lock content is treated as stale") {
        {
            std::ofstream out(guarded + ".lock");
            out << "not a pid\n";
        }
        CHECK_NOTHROW(tim::LockFile{guarded});
    }
}
