#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tim/bench.hpp"
#include "tim/config.hpp"
#include "tim/error.hpp"
#include "tim/memory_store.hpp"
#include "tim/pipeline.hpp"
#include "tim/providers.hpp"
#include "tim/thought_ops.hpp"

namespace py = pybind11;

namespace {

// Lets Python classes stand in for the provider contracts.
class PyEmbeddingProvider : public tim::EmbeddingProvider {
public:
    std::size_t dim() const override {
        PYBIND11_OVERRIDE_PURE(std::size_t, tim::EmbeddingProvider, dim);
    }
    bool deterministic() const override {
        PYBIND11_OVERRIDE_PURE(bool, tim::EmbeddingProvider, deterministic);
    }
    tim::EmbeddingVector embed(const std::string& text) override {
        PYBIND11_OVERRIDE_PURE(tim::EmbeddingVector, tim::EmbeddingProvider, embed, text);
    }
};

class PyLanguageModelProvider : public tim::LanguageModelProvider {
public:
    std::string complete(const std::string& prompt) override {
        PYBIND11_OVERRIDE_PURE(std::string, tim::LanguageModelProvider, complete, prompt);
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "LSH-bucketed long-term conversational memory engine";

    py::register_exception<tim::Error>(m, "TimError");

    py::class_<tim::EmbeddingVector>(m, "EmbeddingVector")
        .def(py::init<>())
        .def(py::init<std::vector<double>>(), py::arg("values"))
        .def_readwrite("values", &tim::EmbeddingVector::values)
        .def("dim", &tim::EmbeddingVector::dim)
        .def("__len__", &tim::EmbeddingVector::dim)
        .def("__eq__",
             [](const tim::EmbeddingVector& a, const tim::EmbeddingVector& b) { return a == b; });

    m.def("cosine_similarity", &tim::cosine_similarity, py::arg("a"), py::arg("b"));
    m.def("fnv1a64", &tim::fnv1a64, py::arg("data"));
    m.def("tokenize", &tim::tokenize, py::arg("text"));
    m.def("embed_hashed", &tim::embed_hashed, py::arg("text"), py::arg("dim"));

    py::class_<tim::ProjectionMatrix>(m, "ProjectionMatrix")
        .def_static("generate", &tim::ProjectionMatrix::generate, py::arg("dim"),
                    py::arg("buckets"), py::arg("seed"))
        .def_static("with_entries", &tim::ProjectionMatrix::with_entries, py::arg("dim"),
                    py::arg("buckets"), py::arg("entries"))
        .def_property_readonly("dim", &tim::ProjectionMatrix::dim)
        .def_property_readonly("buckets", &tim::ProjectionMatrix::buckets)
        .def_property_readonly("seed", &tim::ProjectionMatrix::seed)
        .def_property_readonly("synthetic", &tim::ProjectionMatrix::synthetic)
        .def("scores", &tim::ProjectionMatrix::scores, py::arg("x"));

    m.def("lsh_bucket", &tim::lsh_bucket, py::arg("x"), py::arg("proj"));
    m.def("probe_order", &tim::probe_order, py::arg("x"), py::arg("proj"));

    py::class_<tim::Thought>(m, "Thought")
        .def_readonly("id", &tim::Thought::id)
        .def_readonly("head", &tim::Thought::head)
        .def_readonly("relation", &tim::Thought::relation)
        .def_readonly("tail", &tim::Thought::tail)
        .def_readonly("text", &tim::Thought::text)
        .def_readonly("turn", &tim::Thought::turn)
        .def_readonly("ts", &tim::Thought::ts)
        .def("__repr__", [](const tim::Thought& t) {
            return "<Thought id=" + std::to_string(t.id) + " " + t.head + " | " + t.relation +
                   " | " + t.tail + ">";
        });

    py::class_<tim::StoredThought>(m, "StoredThought")
        .def_readonly("thought", &tim::StoredThought::thought)
        .def_readonly("embedding", &tim::StoredThought::embedding);

    py::class_<tim::ScoredThought>(m, "ScoredThought")
        .def_readonly("thought", &tim::ScoredThought::thought)
        .def_readonly("score", &tim::ScoredThought::score);

    py::class_<tim::RecallResult>(m, "RecallResult")
        .def_readonly("hits", &tim::RecallResult::hits)
        .def_readonly("probed_buckets", &tim::RecallResult::probed_buckets)
        .def_readonly("comparisons", &tim::RecallResult::comparisons);

    py::class_<tim::CacheStats>(m, "CacheStats")
        .def_readonly("per_bucket", &tim::CacheStats::per_bucket)
        .def_readonly("total", &tim::CacheStats::total);

    py::class_<tim::MemoryCache>(m, "MemoryCache")
        .def(py::init<tim::ProjectionMatrix>(), py::arg("proj"))
        .def_property_readonly("projection", &tim::MemoryCache::projection)
        .def_property_readonly("bucket_count", &tim::MemoryCache::bucket_count)
        .def("__len__", &tim::MemoryCache::size)
        .def("insert", &tim::MemoryCache::insert, py::arg("head"), py::arg("relation"),
             py::arg("tail"), py::arg("text"), py::arg("turn"), py::arg("embedding"))
        .def("recall", &tim::MemoryCache::recall, py::arg("query"), py::arg("k"),
             py::arg("probe_depth") = tim::kDefaultProbeDepth)
        .def("remove", &tim::MemoryCache::remove, py::arg("ids"))
        .def("replace", &tim::MemoryCache::replace, py::arg("old_ids"), py::arg("head"),
             py::arg("relation"), py::arg("tail"), py::arg("text"), py::arg("turn"),
             py::arg("embedding"))
        .def("stats", &tim::MemoryCache::stats)
        .def("audit", &tim::MemoryCache::audit)
        .def("group", &tim::MemoryCache::group, py::arg("bucket"))
        .def("all", &tim::MemoryCache::all)
        .def("save_snapshot",
             [](const tim::MemoryCache& cache, const std::string& path) {
                 return cache.save_snapshot(path);
             },
             py::arg("path"))
        .def_static("load_snapshot",
                    [](const std::string& path) { return tim::MemoryCache::load_snapshot(path); },
                    py::arg("path"))
        .def("__eq__",
             [](const tim::MemoryCache& a, const tim::MemoryCache& b) { return a == b; });

    py::class_<tim::EmbeddingProvider, PyEmbeddingProvider>(m, "EmbeddingProvider")
        .def(py::init<>())
        .def("dim", &tim::EmbeddingProvider::dim)
        .def("deterministic", &tim::EmbeddingProvider::deterministic)
        .def("embed", &tim::EmbeddingProvider::embed, py::arg("text"));

    py::class_<tim::HashedEmbedder, tim::EmbeddingProvider>(m, "HashedEmbedder")
        .def(py::init<std::size_t>(), py::arg("dim"));

    py::class_<tim::LanguageModelProvider, PyLanguageModelProvider>(m, "LanguageModelProvider")
        .def(py::init<>())
        .def("complete", &tim::LanguageModelProvider::complete, py::arg("prompt"));

    py::class_<tim::ScriptedLlm, tim::LanguageModelProvider>(m, "ScriptedLlm")
        .def(py::init<tim::Script, std::string>(), py::arg("script"), py::arg("fallback"));

    py::class_<tim::EchoLlm, tim::LanguageModelProvider>(m, "EchoLlm").def(py::init<>());

    py::enum_<tim::ExtractionMode>(m, "ExtractionMode")
        .value("rule", tim::ExtractionMode::rule)
        .value("llm", tim::ExtractionMode::llm);

    py::class_<tim::ExtractionConfig>(m, "ExtractionConfig")
        .def(py::init<>())
        .def_readwrite("mode", &tim::ExtractionConfig::mode)
        .def_readwrite("functional_relations", &tim::ExtractionConfig::functional_relations)
        .def_readwrite("generate_template", &tim::ExtractionConfig::generate_template)
        .def_readwrite("forget_template", &tim::ExtractionConfig::forget_template)
        .def_readwrite("merge_template", &tim::ExtractionConfig::merge_template);

    py::class_<tim::TripleCandidate>(m, "TripleCandidate")
        .def_readonly("head", &tim::TripleCandidate::head)
        .def_readonly("relation", &tim::TripleCandidate::relation)
        .def_readonly("tail", &tim::TripleCandidate::tail)
        .def_readonly("text", &tim::TripleCandidate::text);

    py::class_<tim::MergeInstruction>(m, "MergeInstruction")
        .def_readonly("old_ids", &tim::MergeInstruction::old_ids)
        .def_readonly("head", &tim::MergeInstruction::head)
        .def_readonly("relation", &tim::MergeInstruction::relation)
        .def_readonly("tail", &tim::MergeInstruction::tail)
        .def_readonly("text", &tim::MergeInstruction::text);

    m.def("extract_thoughts", &tim::extract_thoughts, py::arg("question"), py::arg("response"),
          py::arg("cfg"), py::arg("llm") = nullptr);
    m.def("decide_forget", &tim::decide_forget, py::arg("group"), py::arg("cfg"),
          py::arg("llm") = nullptr);
    m.def("decide_merge", &tim::decide_merge, py::arg("group"), py::arg("cfg"),
          py::arg("llm") = nullptr);

    py::class_<tim::ConversationTurn>(m, "ConversationTurn")
        .def(py::init([](std::uint64_t turn, std::string question, std::string response) {
                 return tim::ConversationTurn{turn, std::move(question), std::move(response)};
             }),
             py::arg("turn"), py::arg("question"), py::arg("response"))
        .def_readwrite("turn", &tim::ConversationTurn::turn)
        .def_readwrite("question", &tim::ConversationTurn::question)
        .def_readwrite("response", &tim::ConversationTurn::response);

    py::class_<tim::PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("top_k", &tim::PipelineConfig::top_k)
        .def_readwrite("maintain_every", &tim::PipelineConfig::maintain_every)
        .def_readwrite("probe_depth", &tim::PipelineConfig::probe_depth)
        .def_readwrite("answer_template", &tim::PipelineConfig::answer_template);

    py::class_<tim::AnswerResult>(m, "AnswerResult")
        .def_readonly("response", &tim::AnswerResult::response)
        .def_readonly("recall", &tim::AnswerResult::recall)
        .def_readonly("prompt", &tim::AnswerResult::prompt);

    py::class_<tim::MaintenanceReport>(m, "MaintenanceReport")
        .def_readonly("removed", &tim::MaintenanceReport::removed)
        .def_readonly("merged", &tim::MaintenanceReport::merged)
        .def_readonly("removed_per_bucket", &tim::MaintenanceReport::removed_per_bucket)
        .def_readonly("merged_per_bucket", &tim::MaintenanceReport::merged_per_bucket)
        .def_readonly("failures", &tim::MaintenanceReport::failures)
        .def_readonly("passes", &tim::MaintenanceReport::passes);

    m.def("answer_query", &tim::answer_query, py::arg("question"), py::arg("cache"),
          py::arg("embedder"), py::arg("llm"), py::arg("cfg"));
    m.def("post_think", &tim::post_think, py::arg("turn"), py::arg("cache"), py::arg("embedder"),
          py::arg("ecfg"), py::arg("llm") = nullptr);
    m.def("maintain", &tim::maintain, py::arg("cache"), py::arg("embedder"), py::arg("ecfg"),
          py::arg("llm") = nullptr);

    py::class_<tim::BenchReport>(m, "BenchReport")
        .def_readonly("n_thoughts", &tim::BenchReport::n_thoughts)
        .def_readonly("n_queries", &tim::BenchReport::n_queries)
        .def_readonly("buckets", &tim::BenchReport::buckets)
        .def_readonly("dim", &tim::BenchReport::dim)
        .def_readonly("k", &tim::BenchReport::k)
        .def_readonly("seed", &tim::BenchReport::seed)
        .def_readonly("mean_comparisons_tim", &tim::BenchReport::mean_comparisons_tim)
        .def_readonly("mean_comparisons_baseline", &tim::BenchReport::mean_comparisons_baseline)
        .def_readonly("mean_latency_tim_us", &tim::BenchReport::mean_latency_tim_us)
        .def_readonly("mean_latency_baseline_us", &tim::BenchReport::mean_latency_baseline_us)
        .def_readonly("speedup_ratio", &tim::BenchReport::speedup_ratio);

    py::class_<tim::TopKCurve>(m, "TopKCurve")
        .def_readonly("ks", &tim::TopKCurve::ks)
        .def_readonly("accuracy", &tim::TopKCurve::accuracy);

    py::class_<tim::EvalReport>(m, "EvalReport")
        .def_readonly("n_thoughts", &tim::EvalReport::n_thoughts)
        .def_readonly("dim", &tim::EvalReport::dim)
        .def_readonly("buckets", &tim::EvalReport::buckets)
        .def_readonly("noise", &tim::EvalReport::noise)
        .def_readonly("seed", &tim::EvalReport::seed)
        .def_readonly("tim", &tim::EvalReport::tim)
        .def_readonly("oracle", &tim::EvalReport::oracle);

    m.def("run_bench", &tim::run_bench, py::arg("n_thoughts"), py::arg("buckets"),
          py::arg("dim"), py::arg("n_queries"), py::arg("k"), py::arg("seed"),
          py::arg("probe_depth") = tim::kDefaultProbeDepth);
    m.def("eval_topk", &tim::eval_topk, py::arg("n_thoughts"), py::arg("dim"),
          py::arg("buckets"), py::arg("noise"), py::arg("ks"), py::arg("seed"),
          py::arg("probe_depth") = tim::kDefaultProbeDepth);
    m.def("full_scan_recall", &tim::full_scan_recall, py::arg("cache"), py::arg("query"),
          py::arg("k"));
}
