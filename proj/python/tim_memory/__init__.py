"""LSH-bucketed long-term conversational memory engine."""

from tim_memory._core import (
    AnswerResult,
    BenchReport,
    CacheStats,
    ConversationTurn,
    EchoLlm,
    EmbeddingProvider,
    EmbeddingVector,
    EvalReport,
    ExtractionConfig,
    ExtractionMode,
    HashedEmbedder,
    LanguageModelProvider,
    MaintenanceReport,
    MemoryCache,
    MergeInstruction,
    PipelineConfig,
    ProjectionMatrix,
    RecallResult,
    ScoredThought,
    ScriptedLlm,
    StoredThought,
    Thought,
    TimError,
    TopKCurve,
    TripleCandidate,
    answer_query,
    cosine_similarity,
    decide_forget,
    decide_merge,
    embed_hashed,
    eval_topk,
    extract_thoughts,
    fnv1a64,
    full_scan_recall,
    lsh_bucket,
    maintain,
    post_think,
    probe_order,
    run_bench,
    tokenize,
)

__all__ = [
    "AnswerResult",
    "BenchReport",
    "CacheStats",
    "ConversationTurn",
    "EchoLlm",
    "EmbeddingProvider",
    "EmbeddingVector",
    "EvalReport",
    "ExtractionConfig",
    "ExtractionMode",
    "HashedEmbedder",
    "LanguageModelProvider",
    "MaintenanceReport",
    "MemoryCache",
    "MergeInstruction",
    "PipelineConfig",
    "ProjectionMatrix",
    "RecallResult",
    "ScoredThought",
    "ScriptedLlm",
    "StoredThought",
    "Thought",
    "TimError",
    "TopKCurve",
    "TripleCandidate",
    "answer_query",
    "cosine_similarity",
    "decide_forget",
    "decide_merge",
    "embed_hashed",
    "eval_topk",
    "extract_thoughts",
    "fnv1a64",
    "full_scan_recall",
    "lsh_bucket",
    "maintain",
    "post_think",
    "probe_order",
    "run_bench",
    "tokenize",
]
