#pragma once

#include <stdexcept>
#include <string>

namespace t2s {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ParseErrorKind { UnbalancedQuote, UnbalancedParen, Grammar };

/// SQL could not be tokenized or parsed.
struct ParseError : Error {
    ParseError(ParseErrorKind k, const std::string& msg) : Error(msg), kind(k) {}
    ParseErrorKind kind;
};

/// Bad run configuration (missing files, invalid flag combinations).
struct ConfigError : Error {
    using Error::Error;
};

/// Schema ingestion problems: malformed tables.json, unknown db_id, bad FK.
struct SchemaError : Error {
    using Error::Error;
};

/// A referenced database file does not exist on disk.
struct DbMissing : Error {
    using Error::Error;
};

/// Completion client failures. request_id identifies the failed request in logs.
struct LlmError : Error {
    explicit LlmError(const std::string& msg, std::string request_id = {})
        : Error(msg), request_id(std::move(request_id)) {}
    std::string request_id;
};

struct AuthError : LlmError {
    using LlmError::LlmError;
};
struct RateLimitExhausted : LlmError {
    using LlmError::LlmError;
};
struct TimeoutError : LlmError {
    using LlmError::LlmError;
};
struct ContextOverflowError : LlmError {
    using LlmError::LlmError;
};
struct LlmUnavailable : LlmError {
    using LlmError::LlmError;
};

/// Prompt rendering asked for an augmentation whose data is not loaded.
struct MissingAugmentationData : Error {
    using Error::Error;
};

}  // namespace t2s
