#include "t2s/sqlsyntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <unordered_set>

namespace t2s::syntax {

namespace {

const std::unordered_set<std::string>& keyword_set() {
    static const std::unordered_set<std::string> kw = {
        "select", "from", "where", "group", "by", "having", "order", "limit", "offset",
        "join", "inner", "left", "right", "outer", "full", "cross", "natural", "on",
        "as", "distinct", "union", "intersect", "except", "all", "any", "asc", "desc",
        "and", "or", "not", "in", "like", "between", "exists", "is", "null",
        "case", "when", "then", "else", "end", "cast",
        "count", "sum", "avg", "min", "max"};
    return kw;
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> tokens;
    size_t i = 0;
    const size_t n = sql.size();
    long paren_depth = 0;

    while (i < n) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        // line comment
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        // block comment
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            size_t end = sql.find("*/", i + 2);
            if (end == std::string_view::npos)
                throw ParseError(ParseErrorKind::Grammar, "unterminated block comment");
            i = end + 2;
            continue;
        }
        // string literals; doubled quote escapes the quote character; the
        // token keeps the source lexeme verbatim so joins re-tokenize cleanly
        if (c == '\'' || c == '"' || c == '`') {
            char quote = c;
            size_t j = i + 1;
            std::string body;
            bool closed = false;
            while (j < n) {
                if (sql[j] == quote) {
                    if (j + 1 < n && sql[j + 1] == quote) {
                        body += quote;
                        j += 2;
                        continue;
                    }
                    closed = true;
                    ++j;
                    break;
                }
                body += sql[j];
                ++j;
            }
            if (!closed)
                throw ParseError(ParseErrorKind::UnbalancedQuote,
                                 std::string("unterminated quote: ") + quote);
            if (quote == '`') {
                tokens.push_back({TokenKind::Identifier, body});
            } else {
                tokens.push_back({TokenKind::Literal, std::string(sql.substr(i, j - i))});
            }
            i = j;
            continue;
        }
        // numbers, including leading-dot decimals
        if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(sql[i + 1]))) {
            size_t j = i;
            bool seen_dot = false;
            while (j < n && (is_digit(sql[j]) || (sql[j] == '.' && !seen_dot))) {
                if (sql[j] == '.') seen_dot = true;
                ++j;
            }
            tokens.push_back({TokenKind::Literal, std::string(sql.substr(i, j - i))});
            i = j;
            continue;
        }
        // identifiers and keywords; qualified names stay one token
        if (is_ident_start(c)) {
            size_t j = i;
            while (j < n && is_ident_char(sql[j])) ++j;
            std::string word(sql.substr(i, j - i));
            // absorb .part or .* suffixes
            while (j < n && sql[j] == '.' && j + 1 < n &&
                   (is_ident_start(sql[j + 1]) || sql[j + 1] == '*')) {
                word += '.';
                ++j;
                if (sql[j] == '*') {
                    word += '*';
                    ++j;
                    break;
                }
                while (j < n && is_ident_char(sql[j])) {
                    word += sql[j];
                    ++j;
                }
            }
            if (word.find('.') == std::string::npos && keyword_set().count(lower(word))) {
                tokens.push_back({TokenKind::Keyword, lower(word)});
            } else {
                tokens.push_back({TokenKind::Identifier, word});
            }
            i = j;
            continue;
        }
        // two-character operators
        if (i + 1 < n) {
            std::string two{c, sql[i + 1]};
            if (two == ">=" || two == "<=" || two == "!=" || two == "<>" || two == "||") {
                tokens.push_back({TokenKind::Operator, two});
                i += 2;
                continue;
            }
        }
        if (std::strchr("=<>+-*/%", c)) {
            tokens.push_back({TokenKind::Operator, std::string(1, c)});
            ++i;
            continue;
        }
        if (c == '(' || c == ')' || c == ',' || c == ';' || c == '.') {
            if (c == '(') ++paren_depth;
            if (c == ')') {
                --paren_depth;
                if (paren_depth < 0)
                    throw ParseError(ParseErrorKind::UnbalancedParen, "unmatched ')'");
            }
            tokens.push_back({TokenKind::Punct, std::string(1, c)});
            ++i;
            continue;
        }
        throw ParseError(ParseErrorKind::Grammar,
                         std::string("unexpected character '") + c + "' in SQL");
    }
    if (paren_depth != 0) throw ParseError(ParseErrorKind::UnbalancedParen, "unmatched '('");
    return tokens;
}

std::string join_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

namespace {

// Indices into the v1 vocabulary. Order is frozen: keywords, operators,
// aggregates, structural surrogates.
enum Feat : size_t {
    F_SELECT, F_FROM, F_WHERE, F_GROUP_BY, F_HAVING, F_ORDER_BY, F_LIMIT, F_JOIN, F_ON, F_AS,
    F_DISTINCT, F_UNION, F_INTERSECT, F_EXCEPT, F_ASC, F_DESC, F_AND, F_OR, F_NOT, F_IN,
    F_LIKE, F_BETWEEN, F_EXISTS, F_IS_NULL,
    F_EQ, F_NEQ, F_GT, F_LT, F_GTE, F_LTE, F_PLUS, F_MINUS, F_TIMES, F_DIVIDE,
    F_COUNT, F_SUM, F_AVG, F_MIN, F_MAX,
    F_STAR_SELECT, F_NESTED_SUBQUERY, F_MULTI_TABLE, F_SELF_JOIN,
    F_COUNT_  // number of features
};

const std::array<const char*, F_COUNT_>& feature_names() {
    static const std::array<const char*, F_COUNT_> names = {
        "SELECT", "FROM", "WHERE", "GROUP_BY", "HAVING", "ORDER_BY", "LIMIT", "JOIN", "ON", "AS",
        "DISTINCT", "UNION", "INTERSECT", "EXCEPT", "ASC", "DESC", "AND", "OR", "NOT", "IN",
        "LIKE", "BETWEEN", "EXISTS", "IS_NULL",
        "EQ", "NEQ", "GT", "LT", "GTE", "LTE", "PLUS", "MINUS", "TIMES", "DIVIDE",
        "COUNT", "SUM", "AVG", "MIN", "MAX",
        "STAR_SELECT", "NESTED_SUBQUERY", "MULTI_TABLE", "SELF_JOIN"};
    return names;
}

std::string strip_quotes(const std::string& name) {
    if (name.size() >= 2) {
        char a = name.front(), b = name.back();
        if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`'))
            return name.substr(1, name.size() - 2);
    }
    return name;
}

}  // namespace

SyntaxVocabulary::SyntaxVocabulary(std::string version, std::vector<std::string> entries)
    : version_(std::move(version)), entries_(std::move(entries)) {}

const SyntaxVocabulary& SyntaxVocabulary::v1() {
    static const SyntaxVocabulary vocab = [] {
        std::vector<std::string> entries;
        entries.reserve(F_COUNT_);
        for (const char* name : feature_names()) entries.emplace_back(name);
        return SyntaxVocabulary("v1", std::move(entries));
    }();
    return vocab;
}

std::optional<size_t> SyntaxVocabulary::index_of(std::string_view name) const {
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i] == name) return i;
    return std::nullopt;
}

std::string SyntaxVocabulary::to_json() const {
    std::string out = "[";
    for (size_t i = 0; i < entries_.size(); ++i) {
        if (i) out += ", ";
        out += '"' + entries_[i] + '"';
    }
    out += "]";
    return out;
}

SyntaxVector SyntaxVector::binarized() const {
    SyntaxVector out;
    out.mode = VectorMode::Binary;
    out.values.reserve(values.size());
    for (int v : values) out.values.push_back(v > 0 ? 1 : 0);
    return out;
}

// ---------------------------------------------------------------------------
// Feature extraction
// ---------------------------------------------------------------------------

namespace {

struct TableScope {
    long depth = 0;
    std::vector<std::string> tables;  // lowercased, quote-stripped
};

// Raw feature counts for the fixed v1 layout.
std::array<int, F_COUNT_> extract_counts(const std::vector<Token>& toks) {
    std::array<int, F_COUNT_> c{};
    c.fill(0);
    std::vector<TableScope> scopes;
    long depth = 0;

    auto finalize_scope = [&](const TableScope& s) {
        if (s.tables.size() >= 2) c[F_MULTI_TABLE] += static_cast<int>(s.tables.size()) - 1;
        std::map<std::string, int> seen;
        for (const auto& t : s.tables) seen[t]++;
        for (const auto& [name, cnt] : seen)
            if (cnt >= 2) c[F_SELF_JOIN] += cnt - 1;
    };

    auto prev_token = [&](size_t i) -> const Token* {
        return i == 0 ? nullptr : &toks[i - 1];
    };

    const size_t n = toks.size();
    for (size_t i = 0; i < n; ++i) {
        const Token& t = toks[i];
        const std::string& x = t.text;

        if (t.kind == TokenKind::Punct) {
            if (x == "(") ++depth;
            if (x == ")") {
                --depth;
                while (!scopes.empty() && scopes.back().depth > depth) {
                    finalize_scope(scopes.back());
                    scopes.pop_back();
                }
            }
            continue;
        }

        if (t.kind == TokenKind::Keyword) {
            if (x == "select") {
                while (!scopes.empty() && scopes.back().depth == depth) {
                    finalize_scope(scopes.back());
                    scopes.pop_back();
                }
                scopes.push_back(TableScope{depth, {}});
                c[F_SELECT]++;
                if (depth > 0) c[F_NESTED_SUBQUERY]++;
            } else if (x == "from" || x == "join") {
                if (x == "from") c[F_FROM]++;
                if (x == "join") c[F_JOIN]++;
                if (scopes.empty()) scopes.push_back(TableScope{depth, {}});
                // collect the table references that follow
                size_t j = i + 1;
                while (j < n) {
                    // skip join qualifiers (inner join, left outer join, ...)
                    if (x == "from" && toks[j].kind == TokenKind::Punct && toks[j].text == "(")
                        break;  // subquery as a table unit; counted via its own select
                    if (toks[j].kind != TokenKind::Identifier) break;
                    scopes.back().tables.push_back(lower(strip_quotes(toks[j].text)));
                    ++j;
                    if (j < n && toks[j].kind == TokenKind::Keyword && toks[j].text == "as" &&
                        j + 1 < n && toks[j + 1].kind == TokenKind::Identifier) {
                        j += 2;
                    } else if (j < n && toks[j].kind == TokenKind::Identifier) {
                        ++j;  // implicit alias
                    }
                    if (x == "from" && j < n && toks[j].kind == TokenKind::Punct &&
                        toks[j].text == ",") {
                        ++j;
                        continue;
                    }
                    break;
                }
            } else if (x == "group" && i + 1 < n && toks[i + 1].text == "by") {
                c[F_GROUP_BY]++;
            } else if (x == "order" && i + 1 < n && toks[i + 1].text == "by") {
                c[F_ORDER_BY]++;
            } else if (x == "is") {
                if (i + 1 < n && toks[i + 1].text == "null")
                    c[F_IS_NULL]++;
                else if (i + 2 < n && toks[i + 1].text == "not" && toks[i + 2].text == "null")
                    c[F_IS_NULL]++;
            } else if (x == "count" || x == "sum" || x == "avg" || x == "min" || x == "max") {
                bool call = i + 1 < n && toks[i + 1].kind == TokenKind::Punct &&
                            toks[i + 1].text == "(";
                if (call) {
                    if (x == "count") c[F_COUNT]++;
                    if (x == "sum") c[F_SUM]++;
                    if (x == "avg") c[F_AVG]++;
                    if (x == "min") c[F_MIN]++;
                    if (x == "max") c[F_MAX]++;
                }
            } else if (x == "where") c[F_WHERE]++;
            else if (x == "having") c[F_HAVING]++;
            else if (x == "limit") c[F_LIMIT]++;
            else if (x == "on") c[F_ON]++;
            else if (x == "as") c[F_AS]++;
            else if (x == "distinct") c[F_DISTINCT]++;
            else if (x == "union") c[F_UNION]++;
            else if (x == "intersect") c[F_INTERSECT]++;
            else if (x == "except") c[F_EXCEPT]++;
            else if (x == "asc") c[F_ASC]++;
            else if (x == "desc") c[F_DESC]++;
            else if (x == "and") c[F_AND]++;
            else if (x == "or") c[F_OR]++;
            else if (x == "not") c[F_NOT]++;
            else if (x == "in") c[F_IN]++;
            else if (x == "like") c[F_LIKE]++;
            else if (x == "between") c[F_BETWEEN]++;
            else if (x == "exists") c[F_EXISTS]++;
            continue;
        }

        if (t.kind == TokenKind::Identifier) {
            if (x.size() >= 2 && x.rfind(".*") == x.size() - 2) c[F_STAR_SELECT]++;
            continue;
        }

        if (t.kind == TokenKind::Operator) {
            if (x == "=") c[F_EQ]++;
            else if (x == "!=" || x == "<>") c[F_NEQ]++;
            else if (x == ">") c[F_GT]++;
            else if (x == "<") c[F_LT]++;
            else if (x == ">=") c[F_GTE]++;
            else if (x == "<=") c[F_LTE]++;
            else if (x == "/") c[F_DIVIDE]++;
            else if (x == "*") {
                const Token* p = prev_token(i);
                bool star = p == nullptr ||
                            (p->kind == TokenKind::Keyword &&
                             (p->text == "select" || p->text == "distinct")) ||
                            (p->kind == TokenKind::Punct && (p->text == "(" || p->text == ","));
                if (star) c[F_STAR_SELECT]++;
                else c[F_TIMES]++;
            } else if (x == "+" || x == "-") {
                const Token* p = prev_token(i);
                bool binary = p != nullptr &&
                              (p->kind == TokenKind::Identifier ||
                               p->kind == TokenKind::Literal ||
                               (p->kind == TokenKind::Punct && p->text == ")") ||
                               (p->kind == TokenKind::Operator && p->text == "*"));
                if (binary) {
                    if (x == "+") c[F_PLUS]++;
                    else c[F_MINUS]++;
                }
            }
            continue;
        }
    }
    while (!scopes.empty()) {
        finalize_scope(scopes.back());
        scopes.pop_back();
    }
    return c;
}

SyntaxVector project(const std::array<int, F_COUNT_>& counts, const SyntaxVocabulary& vocab,
                     VectorMode mode) {
    SyntaxVector out;
    out.mode = mode;
    out.values.assign(vocab.size(), 0);
    const auto& names = feature_names();
    for (size_t f = 0; f < F_COUNT_; ++f) {
        if (auto idx = vocab.index_of(names[f])) {
            out.values[*idx] = mode == VectorMode::Binary ? (counts[f] > 0 ? 1 : 0) : counts[f];
        }
    }
    return out;
}

}  // namespace

SyntaxVector get_syntax_vector(std::string_view sql, const SyntaxVocabulary& vocab,
                               VectorMode mode) {
    auto toks = tokenize(sql);
    return project(extract_counts(toks), vocab, mode);
}

SyntaxVector get_syntax_vector_degraded(std::string_view sql, const SyntaxVocabulary& vocab,
                                        VectorMode mode) {
    std::array<int, F_COUNT_> c{};
    c.fill(0);
    const std::string text = lower(sql);
    const size_t n = text.size();

    // word scan
    struct Word {
        std::string w;
        size_t end;  // index one past the word
    };
    std::vector<Word> words;
    for (size_t i = 0; i < n;) {
        if (is_ident_start(text[i])) {
            size_t j = i;
            while (j < n && is_ident_char(text[j])) ++j;
            words.push_back({text.substr(i, j - i), j});
            i = j;
        } else {
            ++i;
        }
    }
    auto next_nonspace = [&](size_t pos) -> char {
        while (pos < n && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        return pos < n ? text[pos] : '\0';
    };
    static const std::map<std::string, Feat> singles = {
        {"select", F_SELECT}, {"from", F_FROM}, {"where", F_WHERE}, {"having", F_HAVING},
        {"limit", F_LIMIT}, {"join", F_JOIN}, {"on", F_ON}, {"as", F_AS},
        {"distinct", F_DISTINCT}, {"union", F_UNION}, {"intersect", F_INTERSECT},
        {"except", F_EXCEPT}, {"asc", F_ASC}, {"desc", F_DESC}, {"and", F_AND}, {"or", F_OR},
        {"not", F_NOT}, {"in", F_IN}, {"like", F_LIKE}, {"between", F_BETWEEN},
        {"exists", F_EXISTS}};
    for (size_t w = 0; w < words.size(); ++w) {
        const std::string& x = words[w].w;
        auto it = singles.find(x);
        if (it != singles.end()) {
            c[it->second]++;
            continue;
        }
        if (x == "group" && w + 1 < words.size() && words[w + 1].w == "by") c[F_GROUP_BY]++;
        else if (x == "order" && w + 1 < words.size() && words[w + 1].w == "by") c[F_ORDER_BY]++;
        else if (x == "is" && w + 1 < words.size() &&
                 (words[w + 1].w == "null" ||
                  (words[w + 1].w == "not" && w + 2 < words.size() && words[w + 2].w == "null")))
            c[F_IS_NULL]++;
        else if (x == "count" || x == "sum" || x == "avg" || x == "min" || x == "max") {
            if (next_nonspace(words[w].end) == '(') {
                if (x == "count") c[F_COUNT]++;
                if (x == "sum") c[F_SUM]++;
                if (x == "avg") c[F_AVG]++;
                if (x == "min") c[F_MIN]++;
                if (x == "max") c[F_MAX]++;
            }
        }
    }
    // operator scan
    for (size_t i = 0; i < n; ++i) {
        char ch = text[i];
        char nx = i + 1 < n ? text[i + 1] : '\0';
        if (ch == '>' && nx == '=') { c[F_GTE]++; ++i; }
        else if (ch == '<' && nx == '=') { c[F_LTE]++; ++i; }
        else if (ch == '!' && nx == '=') { c[F_NEQ]++; ++i; }
        else if (ch == '<' && nx == '>') { c[F_NEQ]++; ++i; }
        else if (ch == '=') c[F_EQ]++;
        else if (ch == '>') c[F_GT]++;
        else if (ch == '<') c[F_LT]++;
        else if (ch == '/') c[F_DIVIDE]++;
        else if (ch == '*') {
            size_t p = i;
            while (p > 0 && std::isspace(static_cast<unsigned char>(text[p - 1]))) --p;
            bool star = p == 0 || text[p - 1] == '(' || text[p - 1] == ',';
            if (!star && p >= 6 && text.compare(p - 6, 6, "select") == 0) star = true;
            if (!star && p >= 8 && text.compare(p - 8, 8, "distinct") == 0) star = true;
            if (star) c[F_STAR_SELECT]++;
            else c[F_TIMES]++;
        } else if (ch == '+' || ch == '-') {
            size_t p = i;
            while (p > 0 && std::isspace(static_cast<unsigned char>(text[p - 1]))) --p;
            bool binary = p > 0 && (is_ident_char(text[p - 1]) || text[p - 1] == ')');
            if (binary) {
                if (ch == '+') c[F_PLUS]++;
                else c[F_MINUS]++;
            }
        } else if (ch == '(') {
            size_t p = i + 1;
            while (p < n && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
            if (text.compare(p, 6, "select") == 0) c[F_NESTED_SUBQUERY]++;
        }
    }
    return project(c, vocab, mode);
}

VectorizeResult vectorize_lenient(std::string_view sql, const SyntaxVocabulary& vocab,
                                  VectorMode mode) {
    try {
        return {get_syntax_vector(sql, vocab, mode), false};
    } catch (const ParseError&) {
        return {get_syntax_vector_degraded(sql, vocab, mode), true};
    }
}

double euclidean_distance(const SyntaxVector& a, const SyntaxVector& b) {
    if (a.values.size() != b.values.size())
        throw Error("euclidean_distance: dimension mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        double d = double(a.values[i]) - double(b.values[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace t2s::syntax
