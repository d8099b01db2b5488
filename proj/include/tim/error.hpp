#pragma once

#include <stdexcept>
#include <string>

namespace tim {

// Error categories surfaced across the library. The CLI maps these onto
// exit codes; tests match on them.
enum class errc {
    invalid_dimension,
    dimension_mismatch,
    zero_vector,
    empty_field,
    missing_id,
    invalid_k,
    invalid_parameter,
    empty_text,
    degenerate_zero,
    malformed_record,
    version_mismatch,
    integrity_failure,
    config_mismatch,
    provider_failure,
    io_error,
};

const char* to_string(errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

inline const char* to_string(errc code) noexcept {
    switch (code) {
        case errc::invalid_dimension: return "invalid-dimension";
        case errc::dimension_mismatch: return "dimension-mismatch";
        case errc::zero_vector: return "zero-vector";
        case errc::empty_field: return "empty-field";
        case errc::missing_id: return "missing-id";
        case errc::invalid_k: return "invalid-k";
        case errc::invalid_parameter: return "invalid-parameter";
        case errc::empty_text: return "empty-text";
        case errc::degenerate_zero: return "degenerate-zero";
        case errc::malformed_record: return "malformed-record";
        case errc::version_mismatch: return "version-mismatch";
        case errc::integrity_failure: return "integrity-failure";
        case errc::config_mismatch: return "config-mismatch";
        case errc::provider_failure: return "provider-failure";
        case errc::io_error: return "io-error";
    }
    return "unknown";
}

}  // namespace tim
