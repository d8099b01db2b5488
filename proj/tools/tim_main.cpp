#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tim/bench.hpp"
#include "tim/config.hpp"
#include "tim/error.hpp"
#include "tim/memory_store.hpp"
#include "tim/pipeline.hpp"
#include "tim/providers.hpp"
#include "tim/thought_ops.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 1 usage error, 2 configuration or snapshot
// problem, 3 provider failure.
int exit_code_for(const tim::Error& e) {
    switch (e.code()) {
        case tim::errc::provider_failure:
            return 3;
        case tim::errc::io_error:
        case tim::errc::config_mismatch:
        case tim::errc::version_mismatch:
        case tim::errc::malformed_record:
        case tim::errc::integrity_failure:
            return 2;
        default:
            return 1;
    }
}

tim::MemoryCache::SnapshotConfig snapshot_config(const tim::AppConfig& config) {
    return {config.dim, config.buckets, config.seed};
}

tim::MemoryCache open_cache(const tim::AppConfig& config) {
    if (!std::filesystem::exists(config.snapshot)) {
        tim::raise(tim::errc::io_error,
                   "snapshot " + config.snapshot + " not found; run `tim init` first");
    }
    return tim::MemoryCache::load_snapshot(config.snapshot, snapshot_config(config));
}

std::unique_ptr<tim::EmbeddingProvider> make_embedder(const tim::AppConfig& config) {
    if (!config.embed_endpoint.empty()) {
        tim::RemoteConfig rc{config.embed_endpoint, config.timeout_ms, config.api_key_env};
        return std::make_unique<tim::RemoteEmbedder>(rc, config.dim);
    }
    return std::make_unique<tim::HashedEmbedder>(config.dim);
}

std::unique_ptr<tim::LanguageModelProvider> make_llm(const tim::AppConfig& config) {
    if (config.mode == "llm") {
        tim::RemoteConfig rc{config.llm_endpoint, config.timeout_ms, config.api_key_env};
        return std::make_unique<tim::RemoteLlm>(rc);
    }
    return std::make_unique<tim::EchoLlm>();
}

void append_session_log(const tim::AppConfig& config, std::uint64_t turn,
                        const std::string& question, const std::string& response,
                        const std::vector<std::uint64_t>& recalled_ids) {
    std::ofstream log(config.session_log, std::ios::app);
    if (!log) {
        tim::raise(tim::errc::io_error, "cannot append to session log " + config.session_log);
    }
    json entry;
    entry["ts"] = static_cast<std::int64_t>(std::time(nullptr));
    entry["turn"] = turn;
    entry["question"] = question;
    entry["response"] = response;
    entry["recalled_ids"] = recalled_ids;
    log << entry.dump() << '\n';
}

std::vector<tim::ConversationTurn> load_turn_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        tim::raise(tim::errc::io_error, "cannot open " + path);
    }
    std::vector<tim::ConversationTurn> turns;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            tim::raise(tim::errc::malformed_record,
                       path + ":" + std::to_string(line_no) + " is not a JSON object");
        }
        for (const auto& item : record.items()) {
            if (item.key() != "turn" && item.key() != "question" && item.key() != "response") {
                tim::raise(tim::errc::malformed_record,
                           path + ":" + std::to_string(line_no) + " has unknown field \"" +
                               item.key() + "\"");
            }
        }
        if (!record.contains("turn") || !record["turn"].is_number_unsigned() ||
            !record.contains("question") || !record["question"].is_string() ||
            !record.contains("response") || !record["response"].is_string()) {
            tim::raise(tim::errc::malformed_record,
                       path + ":" + std::to_string(line_no) +
                           " needs fields turn (integer), question, response (strings)");
        }
        tim::ConversationTurn turn;
        turn.turn = record["turn"].get<std::uint64_t>();
        turn.question = record["question"].get<std::string>();
        turn.response = record["response"].get<std::string>();
        if (turn.question.empty()) {
            tim::raise(tim::errc::malformed_record,
                       path + ":" + std::to_string(line_no) + " question is empty");
        }
        turns.push_back(std::move(turn));
    }
    return turns;
}

void print_trace(const tim::RecallResult& recall) {
    std::ostringstream out;
    out << "trace: probed=[";
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
    std::cerr << out.str() << '\n';
}

void print_maintenance(const tim::MaintenanceReport& report) {
    std::cout << "removed=" << report.removed << " merged=" << report.merged
              << " passes=" << report.passes << '\n';
    for (const auto& [bucket, count] : report.removed_per_bucket) {
        std::cout << "bucket " << bucket << ": removed " << count << '\n';
    }
    for (const auto& [bucket, count] : report.merged_per_bucket) {
        std::cout << "bucket " << bucket << ": merged " << count << '\n';
    }
    for (const auto& [bucket, reason] : report.failures) {
        std::cerr << "bucket " << bucket << " failed: " << reason << '\n';
    }
}

int cmd_init(const tim::AppConfig& config) {
    tim::LockFile lock(config.snapshot);
    if (std::filesystem::exists(config.snapshot)) {
        tim::raise(tim::errc::io_error,
                   "snapshot " + config.snapshot + " already exists; refusing to overwrite");
    }
    tim::MemoryCache cache(
        tim::ProjectionMatrix::generate(config.dim, config.buckets, config.seed));
    cache.save_snapshot(config.snapshot);
    std::cout << "initialized " << config.snapshot << " (dim=" << config.dim
              << " buckets=" << config.buckets << " seed=" << config.seed << ")\n";
    return 0;
}

int cmd_ingest(const tim::AppConfig& config, const std::string& file) {
    tim::LockFile lock(config.snapshot);
    tim::MemoryCache cache = open_cache(config);
    const auto embedder = make_embedder(config);
    const tim::ExtractionConfig ecfg = tim::extraction_config(config);
    std::unique_ptr<tim::LanguageModelProvider> llm;
    if (config.mode == "llm") llm = make_llm(config);

    const std::vector<tim::ConversationTurn> turns = load_turn_file(file);
    std::size_t inserted = 0;
    std::size_t processed = 0;
    for (const tim::ConversationTurn& turn : turns) {
        const std::vector<std::uint64_t> ids =
            tim::post_think(turn, cache, *embedder, ecfg, llm.get());
        inserted += ids.size();
        append_session_log(config, turn.turn, turn.question, turn.response, {});
        ++processed;
        if (config.maintain_every != 0 && processed % config.maintain_every == 0) {
            print_maintenance(tim::maintain(cache, *embedder, ecfg, llm.get()));
        }
    }
    if (config.maintain_every != 0 && processed % config.maintain_every != 0) {
        print_maintenance(tim::maintain(cache, *embedder, ecfg, llm.get()));
    }
    cache.save_snapshot(config.snapshot);
    std::cout << "ingested " << processed << " turns, " << inserted << " thoughts extracted, "
              << cache.size() << " in memory\n";
    return 0;
}

int cmd_chat(const tim::AppConfig& config, bool trace) {
    tim::LockFile lock(config.snapshot);
    tim::MemoryCache cache = open_cache(config);
    const auto embedder = make_embedder(config);
    const auto llm = make_llm(config);
    const tim::ExtractionConfig ecfg = tim::extraction_config(config);
    const tim::PipelineConfig pcfg = tim::pipeline_config(config);

    std::string line;
    std::uint64_t turn_no = 0;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        const tim::AnswerResult answer = tim::answer_query(line, cache, *embedder, *llm, pcfg);
        std::cout << answer.response << '\n';
        if (trace) print_trace(answer.recall);

        std::vector<std::uint64_t> recalled;
        for (const tim::ScoredThought& hit : answer.recall.hits) {
            recalled.push_back(hit.thought.id);
        }
        tim::post_think({turn_no, line, answer.response}, cache, *embedder, ecfg,
                        config.mode == "llm" ? llm.get() : nullptr);
        append_session_log(config, turn_no, line, answer.response, recalled);
        ++turn_no;
        if (config.maintain_every != 0 && turn_no % config.maintain_every == 0) {
            tim::maintain(cache, *embedder, ecfg,
                          config.mode == "llm" ? llm.get() : nullptr);
        }
    }
    cache.save_snapshot(config.snapshot);
    return 0;
}

int cmd_recall(const tim::AppConfig& config, const std::string& query, std::size_t k,
               bool trace) {
    tim::LockFile lock(config.snapshot);
    const tim::MemoryCache cache = open_cache(config);
    const auto embedder = make_embedder(config);
    const tim::RecallResult result =
        cache.recall(embedder->embed(query), k, config.probe_depth);
    for (std::size_t i = 0; i < result.hits.size(); ++i) {
        const tim::ScoredThought& hit = result.hits[i];
        std::printf("%zu. score=%.6f id=%llu %s | %s | %s :: %s\n", i + 1, hit.score,
                    static_cast<unsigned long long>(hit.thought.id), hit.thought.head.c_str(),
                    hit.thought.relation.c_str(), hit.thought.tail.c_str(),
                    hit.thought.text.c_str());
    }
    if (result.hits.empty()) {
        std::cout << "(no thoughts recalled)\n";
    }
    if (trace) print_trace(result);
    return 0;
}

int cmd_maintain(const tim::AppConfig& config) {
    tim::LockFile lock(config.snapshot);
    tim::MemoryCache cache = open_cache(config);
    const auto embedder = make_embedder(config);
    const tim::ExtractionConfig ecfg = tim::extraction_config(config);
    std::unique_ptr<tim::LanguageModelProvider> llm;
    if (config.mode == "llm") llm = make_llm(config);

    print_maintenance(tim::maintain(cache, *embedder, ecfg, llm.get()));
    cache.save_snapshot(config.snapshot);
    return 0;
}

int cmd_stats(const tim::AppConfig& config) {
    tim::LockFile lock(config.snapshot);
    const tim::MemoryCache cache = open_cache(config);
    const tim::CacheStats stats = cache.stats();
    for (std::size_t b = 0; b < stats.per_bucket.size(); ++b) {
        if (stats.per_bucket[b] != 0) {
            std::cout << "bucket " << b << ": " << stats.per_bucket[b] << '\n';
        }
    }
    std::cout << "total: " << stats.total << '\n';
    return 0;
}

void write_csv_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        tim::raise(tim::errc::io_error, "cannot open " + path + " for writing");
    }
    out << content;
}

int cmd_bench(const tim::AppConfig& config, std::size_t n, std::size_t buckets,
              std::size_t queries, std::size_t k, const std::string& csv_path) {
    const tim::BenchReport report =
        tim::run_bench(n, buckets, config.dim, queries, k, config.seed, config.probe_depth);
    std::printf("n_thoughts=%zu buckets=%zu dim=%zu queries=%zu k=%zu seed=%llu\n",
                report.n_thoughts, report.buckets, report.dim, report.n_queries, report.k,
                static_cast<unsigned long long>(report.seed));
    std::printf("mean_comparisons_tim=%.2f mean_comparisons_baseline=%.2f\n",
                report.mean_comparisons_tim, report.mean_comparisons_baseline);
    std::printf("mean_latency_tim_us=%.2f mean_latency_baseline_us=%.2f speedup=%.2f\n",
                report.mean_latency_tim_us, report.mean_latency_baseline_us,
                report.speedup_ratio);
    if (!csv_path.empty()) {
        std::ostringstream csv;
        tim::write_bench_csv(csv, report);
        write_csv_file(csv_path, csv.str());
    }
    return 0;
}

int cmd_eval(const tim::AppConfig& config, std::size_t n, std::size_t dim, std::size_t buckets,
             double noise, const std::string& ks_arg, const std::string& csv_path) {
    std::vector<std::size_t> ks;
    std::string token;
    std::istringstream in(ks_arg);
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        try {
            ks.push_back(std::stoull(token));
        } catch (const std::exception&) {
            tim::raise(tim::errc::invalid_parameter, "bad k value \"" + token + "\"");
        }
    }
    const tim::EvalReport report =
        tim::eval_topk(n, dim, buckets, noise, ks, config.seed, config.probe_depth);
    for (std::size_t i = 0; i < report.tim.ks.size(); ++i) {
        std::printf("k=%zu accuracy_tim=%.3f accuracy_oracle=%.3f\n", report.tim.ks[i],
                    report.tim.accuracy[i], report.oracle.accuracy[i]);
    }
    if (!csv_path.empty()) {
        std::ostringstream csv;
        tim::write_eval_csv(csv, report);
        write_csv_file(csv_path, csv.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-term conversational memory engine"};
    app.require_subcommand(1);

    std::string config_path, snapshot_flag, mode_flag;
    std::size_t top_k_flag = 0;
    app.add_option("--config", config_path, "Configuration file (flat JSON)");
    app.add_option("--snapshot", snapshot_flag, "Snapshot path override");
    app.add_option("--mode", mode_flag, "Extraction mode override")
        ->check(CLI::IsMember({"rule", "llm"}));
    app.add_option("--top-k", top_k_flag, "Recall depth override");

    CLI::App* c_init = app.add_subcommand("init", "Create an empty snapshot");

    std::string ingest_file;
    CLI::App* c_ingest = app.add_subcommand("ingest", "Post-think a file of Q-R turns");
    c_ingest->add_option("file", ingest_file, "JSONL turn file")->required();

    bool chat_trace = false;
    CLI::App* c_chat = app.add_subcommand("chat", "Interactive REPL");
    c_chat->add_flag("--trace", chat_trace, "Print the recall trace per turn");

    std::string recall_query;
    std::size_t recall_k = 0;
    bool recall_trace = false;
    CLI::App* c_recall = app.add_subcommand("recall", "Rank stored thoughts against a query");
    c_recall->add_option("query", recall_query, "Query text")->required();
    c_recall->add_option("-k", recall_k, "Number of thoughts to recall");
    c_recall->add_flag("--trace", recall_trace, "Print the recall trace");

    CLI::App* c_maintain = app.add_subcommand("maintain", "Run a forget/merge pass");
    CLI::App* c_stats = app.add_subcommand("stats", "Per-bucket occupancy");

    std::size_t bench_n = 140, bench_buckets = 16, bench_queries = 100, bench_k = 5;
    std::string bench_csv;
    CLI::App* c_bench = app.add_subcommand("bench", "Retrieval-cost comparison");
    c_bench->add_option("--n", bench_n, "Thoughts in the synthetic cache");
    c_bench->add_option("--buckets", bench_buckets, "Bucket count");
    c_bench->add_option("--queries", bench_queries, "Number of queries");
    c_bench->add_option("-k,--k", bench_k, "Recall depth");
    c_bench->add_option("--csv", bench_csv, "Write the report as CSV");

    std::size_t eval_n = 200, eval_dim = 128, eval_buckets = 16;
    double eval_noise = 0.3;
    std::string eval_ks = "1,5,10", eval_csv;
    CLI::App* c_eval = app.add_subcommand("eval", "Top-k accuracy curve");
    c_eval->add_option("--n", eval_n, "Planted thoughts");
    c_eval->add_option("--dim", eval_dim, "Embedding dimension");
    c_eval->add_option("--buckets", eval_buckets, "Bucket count");
    c_eval->add_option("--noise", eval_noise, "Query perturbation in [0,1)");
    c_eval->add_option("--ks", eval_ks, "Comma-separated ascending k values");
    c_eval->add_option("--csv", eval_csv, "Write the curves as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    tim::AppConfig config;
    try {
        if (!config_path.empty()) config = tim::load_config_file(config_path);
        tim::apply_env_overrides(config);
        if (!snapshot_flag.empty()) config.snapshot = snapshot_flag;
        if (!mode_flag.empty()) config.mode = mode_flag;
        if (app.count("--top-k") > 0) config.top_k = top_k_flag;
        tim::validate(config);
    } catch (const tim::Error& e) {
        std::cerr << "tim: " << e.what() << '\n';
        return 2;
    }

    try {
        if (c_init->parsed()) return cmd_init(config);
        if (c_ingest->parsed()) return cmd_ingest(config, ingest_file);
        if (c_chat->parsed()) return cmd_chat(config, chat_trace);
        if (c_recall->parsed()) {
            const std::size_t k = c_recall->count("-k") > 0 ? recall_k : config.top_k;
            return cmd_recall(config, recall_query, k, recall_trace);
        }
        if (c_maintain->parsed()) return cmd_maintain(config);
        if (c_stats->parsed()) return cmd_stats(config);
        if (c_bench->parsed()) {
            return cmd_bench(config, bench_n, bench_buckets, bench_queries, bench_k, bench_csv);
        }
        if (c_eval->parsed()) {
            return cmd_eval(config, eval_n, eval_dim, eval_buckets, eval_noise, eval_ks,
                            eval_csv);
        }
    } catch (const tim::Error& e) {
        std::cerr << "tim: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "tim: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
