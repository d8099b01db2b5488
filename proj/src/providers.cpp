#include "tim/providers.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "tim/error.hpp"

namespace tim {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

bool is_token_byte(unsigned char c) {
    if (c >= 'a' && c <= 'z') return true;
    if (c >= 'A' && c <= 'Z') return true;
    if (c >= '0' && c <= '9') return true;
    return c >= 0x80;
}

unsigned char to_lower_byte(unsigned char c) {
    if (c >= 'A' && c <= 'Z') return static_cast<unsigned char>(c - 'A' + 'a');
    return c;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_token_byte(c)) {
            current.push_back(static_cast<char>(to_lower_byte(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

EmbeddingVector embed_hashed_raw(std::string_view text, std::size_t dim) {
    if (dim == 0) {
        raise(errc::invalid_dimension, "embedding dim must be positive");
    }
    const std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty()) {
        raise(errc::empty_text, "no tokens in \"" + std::string(text) + "\"");
    }
    EmbeddingVector v;
    v.values.assign(dim, 0.0);
    for (const std::string& token : tokens) {
        const std::uint64_t h = fnv1a64(token);
        const std::size_t coord = static_cast<std::size_t>(h % dim);
        v.values[coord] += ((h >> 32) & 1ull) ? 1.0 : -1.0;
    }
    return v;
}

EmbeddingVector embed_hashed(std::string_view text, std::size_t dim) {
    if (dim < 8) {
        raise(errc::invalid_dimension,
              "embedding dim must be >= 8, got " + std::to_string(dim));
    }
    EmbeddingVector v = embed_hashed_raw(text, dim);
    const double norm = l2_norm(v);
    if (norm == 0.0) {
        raise(errc::degenerate_zero,
              "token signs cancelled to the zero vector for \"" + std::string(text) + "\"");
    }
    for (double& x : v.values) x /= norm;
    return v;
}

HashedEmbedder::HashedEmbedder(std::size_t dim) : dim_(dim) {
    if (dim < 8) {
        raise(errc::invalid_dimension,
              "embedding dim must be >= 8, got " + std::to_string(dim));
    }
}

EmbeddingVector HashedEmbedder::embed(const std::string& text) {
    return embed_hashed(text, dim_);
}

std::string scripted_complete(const std::string& prompt, const Script& script,
                              const std::string& fallback) {
    for (const auto& [key, response] : script) {
        if (prompt.find(key) != std::string::npos) return response;
    }
    return fallback;
}

ScriptedLlm::ScriptedLlm(Script script, std::string fallback)
    : script_(std::move(script)), fallback_(std::move(fallback)) {}

std::string ScriptedLlm::complete(const std::string& prompt) {
    return scripted_complete(prompt, script_, fallback_);
}

std::string EchoLlm::complete(const std::string& prompt) {
    std::size_t pos = 0;
    while (pos < prompt.size()) {
        std::size_t end = prompt.find('\n', pos);
        if (end == std::string::npos) end = prompt.size();
        std::string_view line(prompt.data() + pos, end - pos);
        if (line.rfind("- ", 0) == 0 && line.size() > 2) {
            return std::string(line.substr(2));
        }
        pos = end + 1;
    }
    return "I have no memory relevant to that.";
}

namespace {

// Splits "http://host:port/path" into the client base and the path.
// httplib's Client accepts the scheme-host-port form directly.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const std::size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos) {
        raise(errc::invalid_parameter, "endpoint missing scheme: " + endpoint);
    }
    const std::size_t path_start = endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

// One POST with the timeout and retry-once policy shared by both remote
// providers. Returns the response text field.
std::string post_text(const RemoteConfig& config, const std::string& text) {
    const auto [base, path] = split_endpoint(config.endpoint);
    nlohmann::json body;
    body["text"] = text;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
        if (const char* key = std::getenv(config.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        httplib::Client client(base);
        client.set_connection_timeout(0, config.timeout_ms * 1000);
        client.set_read_timeout(0, config.timeout_ms * 1000);
        client.set_write_timeout(0, config.timeout_ms * 1000);

        httplib::Result res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text") ||
            !parsed["text"].is_string()) {
            last_error = "response body is not a {\"text\": ...} object";
            continue;
        }
        return parsed["text"].get<std::string>();
    }
    raise(errc::provider_failure, config.endpoint + ": " + last_error);
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteConfig config, std::size_t dim)
    : config_(std::move(config)), dim_(dim) {
    if (dim == 0) {
        raise(errc::invalid_dimension, "embedding dim must be positive");
    }
}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) {
    const std::string reply = post_text(config_, text);
    nlohmann::json parsed = nlohmann::json::parse(reply, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array()) {
        raise(errc::provider_failure,
              config_.endpoint + ": embedding reply is not a JSON array");
    }
    EmbeddingVector v;
    v.values.reserve(parsed.size());
    for (const auto& item : parsed) {
        if (!item.is_number()) {
            raise(errc::provider_failure, config_.endpoint + ": non-numeric embedding entry");
        }
        v.values.push_back(item.get<double>());
    }
    if (v.dim() != dim_) {
        raise(errc::provider_failure,
              config_.endpoint + ": expected " + std::to_string(dim_) + " values, got " +
                  std::to_string(v.dim()));
    }
    if (!all_finite(v)) {
        raise(errc::provider_failure, config_.endpoint + ": non-finite embedding entry");
    }
    const double norm = l2_norm(v);
    if (norm == 0.0) {
        raise(errc::provider_failure, config_.endpoint + ": zero embedding returned");
    }
    for (double& x : v.values) x /= norm;
    return v;
}

RemoteLlm::RemoteLlm(RemoteConfig config) : config_(std::move(config)) {}

std::string RemoteLlm::complete(const std::string& prompt) {
    return post_text(config_, prompt);
}

}  // namespace tim
