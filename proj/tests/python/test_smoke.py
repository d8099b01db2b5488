#!/usr/bin/env python3
"""Smoke test for the tim_memory bindings: every core operation once,
including Python-subclassed providers driving the C++ pipeline."""

import math
import os
import sys
import tempfile

import tim_memory as tm


def test_hashing_and_embedding():
    assert tm.fnv1a64("alice") == 5803779529149266183
    assert tm.tokenize("Alice, likes JAZZ!") == ["alice", "likes", "jazz"]

    v = tm.embed_hashed("alice likes jazz", 64)
    assert len(v) == 64
    nonzero = {i: x for i, x in enumerate(v.values) if x != 0.0}
    inv = 1.0 / math.sqrt(3.0)
    assert set(nonzero) == {7, 31, 48}
    assert abs(nonzero[7] - inv) < 1e-15
    assert abs(nonzero[31] + inv) < 1e-15
    assert abs(nonzero[48] + inv) < 1e-15

    assert tm.cosine_similarity(v, v) == 1.0
    try:
        tm.embed_hashed("", 64)
    except tm.TimError:
        pass
    else:
        raise AssertionError("empty text must raise")


def test_lsh():
    proj = tm.ProjectionMatrix.generate(64, 16, 42)
    assert proj.dim == 64 and proj.buckets == 16 and proj.seed == 42
    v = tm.embed_hashed("alice likes jazz", 64)
    bucket = tm.lsh_bucket(v, proj)
    assert 0 <= bucket < 16
    order = tm.probe_order(v, proj)
    assert order[0] == bucket
    assert sorted(order) == list(range(16))
    scaled = tm.EmbeddingVector([1000.0 * x for x in v.values])
    assert tm.lsh_bucket(scaled, proj) == bucket


def test_cache_roundtrip():
    proj = tm.ProjectionMatrix.generate(64, 16, 42)
    cache = tm.MemoryCache(proj)
    embedder = tm.HashedEmbedder(64)

    texts = ["Alice likes jazz", "Bob plays chess", "Carol collects stamps"]
    for i, text in enumerate(texts):
        head, relation, tail = text.split()
        tid, bucket = cache.insert(head, relation, tail, text, i + 1, embedder.embed(text))
        assert tid == i
        assert 0 <= bucket < 16
    assert len(cache) == 3
    assert cache.audit()
    assert cache.stats().total == 3

    hits = cache.recall(embedder.embed("Alice likes jazz"), 2)
    assert hits.hits[0].thought.text == "Alice likes jazz"
    assert hits.hits[0].score == 1.0
    assert hits.comparisons >= 1

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "snap.jsonl")
        written = cache.save_snapshot(path)
        assert written == 3
        loaded = tm.MemoryCache.load_snapshot(path)
        assert loaded == cache
        again = loaded.recall(embedder.embed("Alice likes jazz"), 2)
        assert [h.thought.id for h in again.hits] == [h.thought.id for h in hits.hits]
        assert [h.score for h in again.hits] == [h.score for h in hits.hits]

    try:
        tm.MemoryCache.load_snapshot("/nonexistent/ghost.jsonl")
    except tm.TimError:
        pass
    else:
        raise AssertionError("missing snapshot must raise")


def test_extraction_modes():
    cfg = tm.ExtractionConfig()
    cands = tm.extract_thoughts("q", "Alice likes jazz. Bob plays chess.", cfg)
    assert [(c.head, c.relation, c.tail) for c in cands] == [
        ("Alice", "likes", "jazz"),
        ("Bob", "plays", "chess"),
    ]
    assert cands[0].text == "Alice likes jazz"

    llm_cfg = tm.ExtractionConfig()
    llm_cfg.mode = tm.ExtractionMode.llm
    scripted = tm.ScriptedLlm([("zebra fact", "Zoe | feeds | zebras\nnot a triple")], "")
    cands = tm.extract_thoughts("q", "zebra fact", llm_cfg, scripted)
    assert [(c.head, c.relation, c.tail) for c in cands] == [("Zoe", "feeds", "zebras")]
    assert cands[0].text == "Zoe feeds zebras"


class PinnedEmbedder(tm.EmbeddingProvider):
    """Sends every text to the same bucket so maintenance sees one group."""

    def __init__(self, width):
        super().__init__()
        self._width = width

    def dim(self):
        return self._width

    def deterministic(self):
        return True

    def embed(self, text):
        return tm.EmbeddingVector([1.0] + [0.0] * (self._width - 1))


class ParrotLlm(tm.LanguageModelProvider):
    def __init__(self):
        super().__init__()
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        return "parrot says ok"


def test_pipeline_with_python_providers():
    proj = tm.ProjectionMatrix.generate(8, 4, 7)
    cache = tm.MemoryCache(proj)
    embedder = PinnedEmbedder(8)
    cfg = tm.ExtractionConfig()
    cfg.functional_relations = {"lives_in"}

    turns = [
        tm.ConversationTurn(1, "Where does Alice live?", "Alice lives_in Paris."),
        tm.ConversationTurn(2, "Did she move?", "Alice lives_in London."),
        tm.ConversationTurn(3, "What does Alice like?", "Alice likes jazz."),
        tm.ConversationTurn(4, "Anything else?", "Alice likes rock."),
    ]
    for turn in turns:
        ids = tm.post_think(turn, cache, embedder, cfg)
        assert len(ids) == 1
    assert len(cache) == 4

    report = tm.maintain(cache, embedder, cfg)
    assert report.removed == 1
    assert report.merged == 1
    assert report.passes >= 2
    texts = sorted(s.thought.text for s in cache.all())
    assert texts == ["Alice likes jazz; rock", "Alice lives_in London"]
    assert cache.audit()

    llm = ParrotLlm()
    result = tm.answer_query("What does Alice like?", cache, embedder, llm, tm.PipelineConfig())
    assert result.response == "parrot says ok"
    assert result.prompt == llm.prompts[0]
    assert "- Alice likes jazz; rock" in result.prompt
    assert len(result.recall.hits) == 2


def test_bench_and_eval():
    report = tm.run_bench(140, 16, 64, 20, 5, 42)
    assert report.mean_comparisons_baseline == 140.0
    assert report.mean_comparisons_tim < 140.0

    ev = tm.eval_topk(100, 32, 8, 0.0, [1], 42)
    assert ev.tim.accuracy == [1.0]
    assert ev.oracle.accuracy == [1.0]


def main():
    tests = [
        test_hashing_and_embedding,
        test_lsh,
        test_cache_roundtrip,
        test_extraction_modes,
        test_pipeline_with_python_providers,
        test_bench_and_eval,
    ]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
