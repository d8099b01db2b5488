#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tim/embedding.hpp"

namespace tim {

// 64-bit FNV-1a over the bytes of `data`. Chosen because it is specified
// exactly, so snapshots embed identically from any implementation.
std::uint64_t fnv1a64(std::string_view data);

// Lowercased tokens of `text`: maximal runs of ASCII letters/digits.
// Bytes >= 0x80 are kept as token bytes so non-ASCII words survive intact
// rather than splitting per byte.
std::vector<std::string> tokenize(std::string_view text);

// Deterministic bag-of-tokens embedding. Each token contributes +-1
// (sign from bit 32 of its FNV-1a hash) at coordinate hash % dim; the
// accumulated vector is returned un-normalized. Empty token list is an
// empty-text error.
EmbeddingVector embed_hashed_raw(std::string_view text, std::size_t dim);

// embed_hashed_raw followed by L2 normalization. Requires dim >= 8.
// Raises degenerate-zero if opposite-signed tokens cancel exactly.
EmbeddingVector embed_hashed(std::string_view text, std::size_t dim);

// Contract for anything that can turn text into a fixed-dimension
// unit vector. One provider instance serves both queries and thoughts.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::size_t dim() const = 0;
    virtual bool deterministic() const = 0;
    virtual EmbeddingVector embed(const std::string& text) = 0;
};

// Contract for text completion.
class LanguageModelProvider {
public:
    virtual ~LanguageModelProvider() = default;

    virtual std::string complete(const std::string& prompt) = 0;
};

class HashedEmbedder : public EmbeddingProvider {
public:
    explicit HashedEmbedder(std::size_t dim);

    std::size_t dim() const override { return dim_; }
    bool deterministic() const override { return true; }
    EmbeddingVector embed(const std::string& text) override;

private:
    std::size_t dim_;
};

// Ordered substring-match script: the first entry whose key occurs in the
// prompt wins; otherwise the fallback. Declaration order is meaningful.
using Script = std::vector<std::pair<std::string, std::string>>;

std::string scripted_complete(const std::string& prompt, const Script& script,
                              const std::string& fallback);

class ScriptedLlm : public LanguageModelProvider {
public:
    ScriptedLlm(Script script, std::string fallback);

    std::string complete(const std::string& prompt) override;

private:
    Script script_;
    std::string fallback_;
};

// Offline responder used by the chat REPL when no real model is
// configured: answers with the first memory line of the prompt, or a
// fixed sentence when the prompt shows no memory.
class EchoLlm : public LanguageModelProvider {
public:
    std::string complete(const std::string& prompt) override;
};

// HTTP provider settings. The request body is {"text": ...} and the
// response body is {"text": ...}; the embedding endpoint returns the
// vector as a JSON array inside that text field.
struct RemoteConfig {
    std::string endpoint;        // e.g. "http://127.0.0.1:8089/embed"
    int timeout_ms = 5000;
    std::string api_key_env;     // env var holding a bearer token; may be empty
};

class RemoteEmbedder : public EmbeddingProvider {
public:
    RemoteEmbedder(RemoteConfig config, std::size_t dim);

    std::size_t dim() const override { return dim_; }
    bool deterministic() const override { return false; }
    EmbeddingVector embed(const std::string& text) override;

private:
    RemoteConfig config_;
    std::size_t dim_;
};

class RemoteLlm : public LanguageModelProvider {
public:
    explicit RemoteLlm(RemoteConfig config);

    std::string complete(const std::string& prompt) override;

private:
    RemoteConfig config_;
};

}  // namespace tim
