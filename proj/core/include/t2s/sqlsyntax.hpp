#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "t2s/errors.hpp"

namespace t2s::syntax {

enum class TokenKind { Keyword, Operator, Identifier, Literal, Punct };

struct Token {
    TokenKind kind;
    std::string text;  // keywords are case-folded to lower, other kinds keep source text

    bool operator==(const Token&) const = default;
};

/// Split a SQL string into tokens. Comments (`--` and `/* */`) are stripped.
/// Single- and double-quoted strings become Literal tokens (quotes included,
/// doubled-quote escapes supported). Qualified names such as `t1.age` stay one
/// Identifier token. Two-character comparison operators are merged.
///
/// Joining the returned token texts with single spaces is the whitespace
/// normalization used throughout: tokenizing that string again yields the
/// same token list.
///
/// Throws ParseError with kind UnbalancedQuote or UnbalancedParen on
/// malformed input.
std::vector<Token> tokenize(std::string_view sql);

/// Render a token list as the canonical whitespace-normalized string.
std::string join_tokens(const std::vector<Token>& tokens);

/// The fixed universe of syntactic features a query is scored against.
/// Entry order is frozen per version; vectors index into it.
class SyntaxVocabulary {
public:
    static const SyntaxVocabulary& v1();

    const std::vector<std::string>& entries() const { return entries_; }
    const std::string& version() const { return version_; }
    size_t size() const { return entries_.size(); }
    std::optional<size_t> index_of(std::string_view name) const;

    /// JSON array of entry names, one line, stable order.
    std::string to_json() const;

    SyntaxVocabulary(std::string version, std::vector<std::string> entries);

private:
    std::string version_;
    std::vector<std::string> entries_;
};

enum class VectorMode { Binary, Counts };

struct SyntaxVector {
    std::vector<int> values;
    VectorMode mode = VectorMode::Binary;

    /// counts -> binary projection (value > 0 becomes 1).
    SyntaxVector binarized() const;

    bool operator==(const SyntaxVector&) const = default;
};

/// Extract the discrete syntax vector of a query over the given vocabulary.
/// Deterministic; invariant under keyword case and whitespace changes.
/// Propagates tokenizer ParseErrors.
SyntaxVector get_syntax_vector(std::string_view sql, const SyntaxVocabulary& vocab,
                               VectorMode mode = VectorMode::Binary);

/// Fallback used when tokenization fails: a plain keyword/operator scan over
/// the raw text. Structural features (nesting, table counts) are left at zero.
SyntaxVector get_syntax_vector_degraded(std::string_view sql, const SyntaxVocabulary& vocab,
                                        VectorMode mode = VectorMode::Binary);

struct VectorizeResult {
    SyntaxVector vector;
    bool degraded = false;
};

/// get_syntax_vector with automatic degraded-mode fallback on parse failure.
VectorizeResult vectorize_lenient(std::string_view sql, const SyntaxVocabulary& vocab,
                                  VectorMode mode = VectorMode::Binary);

double euclidean_distance(const SyntaxVector& a, const SyntaxVector& b);

}  // namespace t2s::syntax
