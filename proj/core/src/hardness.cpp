#include "t2s/hardness.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <memory>
#include <set>
#include <vector>

#include "t2s/sqlsyntax.hpp"

// Difficulty classification ported from the Spider official evaluation
// script: the query is parsed with the same restricted SQL grammar, the same
// three component counts are taken over the parse, and the same bucketing
// thresholds applied. Quirks of the original counting (e.g. NOT conditions
// feeding the aggregate tally) are reproduced on purpose so labels agree
// with that script exactly.

namespace t2s::syntax {

namespace {

const std::set<std::string> kClauseKeywords = {"select", "from",  "where", "group", "order",
                                               "limit",  "intersect", "union", "except"};
const std::set<std::string> kJoinKeywords = {"join", "on", "as"};
const std::vector<std::string> kWhereOps = {"not", "between", "=",  ">",    "<",  ">=",
                                            "<=",  "!=",      "in", "like", "is", "exists"};
const std::vector<std::string> kUnitOps = {"none", "-", "+", "*", "/"};
const std::vector<std::string> kAggOps = {"none", "max", "min", "count", "sum", "avg"};
const std::set<std::string> kCondOps = {"and", "or"};
const std::set<std::string> kSqlOps = {"intersect", "union", "except"};
const std::set<std::string> kOrderOps = {"desc", "asc"};

int index_of(const std::vector<std::string>& v, const std::string& x) {
    auto it = std::find(v.begin(), v.end(), x);
    return it == v.end() ? -1 : int(it - v.begin());
}

const int kOpLike = index_of(kWhereOps, "like");
const int kOpBetween = index_of(kWhereOps, "between");

struct GTok {
    std::string text;  // lowercased
    TokenKind kind;
};

struct GSql;

struct GColUnit {
    int agg = 0;  // index into kAggOps
    std::string col;
    bool distinct = false;
};

struct GValUnit {
    int unit_op = 0;  // index into kUnitOps
    GColUnit a;
    GColUnit b;
};

struct GValue {
    enum class Kind { None, Number, String, Column, Sql };
    Kind kind = Kind::None;
    GColUnit col;
    std::unique_ptr<GSql> sql;
};

struct GCond {
    bool not_op = false;
    int op_id = 0;  // index into kWhereOps
    GValUnit val_unit;
    GValue val1;
    GValue val2;
};

// conds[i] and conds[i+1] are joined by connectors[i] ("and"/"or")
struct GCondList {
    std::vector<GCond> conds;
    std::vector<std::string> connectors;
    bool empty() const { return conds.empty(); }
};

struct GSql {
    std::vector<std::pair<int, GValUnit>> select_units;  // (agg, val_unit)
    bool select_distinct = false;
    int table_unit_count = 0;
    GCondList from_conds;
    GCondList where;
    std::vector<GColUnit> group_by;
    GCondList having;
    bool has_order = false;
    std::vector<GValUnit> order_units;
    bool has_limit = false;
    std::unique_ptr<GSql> op_intersect;
    std::unique_ptr<GSql> op_union;
    std::unique_ptr<GSql> op_except;
};

[[noreturn]] void fail(const std::string& msg) {
    throw ParseError(ParseErrorKind::Grammar, msg);
}

class GrammarParser {
public:
    explicit GrammarParser(std::vector<GTok> toks) : toks_(std::move(toks)) {}

    GSql parse() {
        GSql sql = parse_sql();
        skip_semicolons();
        if (idx_ != toks_.size()) fail("trailing tokens after query");
        return sql;
    }

private:
    bool done() const { return idx_ >= toks_.size(); }
    const GTok& cur() const {
        if (done()) fail("unexpected end of query");
        return toks_[idx_];
    }
    bool at(const std::string& text) const { return !done() && toks_[idx_].text == text; }
    bool at_clause_boundary() const {
        if (done()) return true;
        const auto& t = cur().text;
        return kClauseKeywords.count(t) || t == ")" || t == ";";
    }
    void expect(const std::string& text) {
        if (!at(text)) fail("expected '" + text + "'");
        ++idx_;
    }
    void skip_semicolons() {
        while (at(";")) ++idx_;
    }

    bool is_name_token() const {
        if (done()) return false;
        const GTok& t = cur();
        if (t.kind == TokenKind::Identifier) return true;
        // a few keywords double as bare column names in the wild ("null")
        if (t.kind == TokenKind::Keyword && !kClauseKeywords.count(t.text) &&
            !kJoinKeywords.count(t.text) && !kCondOps.count(t.text) &&
            !kOrderOps.count(t.text) && index_of(kAggOps, t.text) < 0 &&
            index_of(kWhereOps, t.text) < 0)
            return true;
        return false;
    }

    GColUnit parse_col_unit() {
        bool is_block = false;
        if (at("(")) {
            is_block = true;
            ++idx_;
        }
        GColUnit unit;
        if (!done() && index_of(kAggOps, cur().text) > 0) {
            unit.agg = index_of(kAggOps, cur().text);
            ++idx_;
            expect("(");
            if (at("distinct")) {
                unit.distinct = true;
                ++idx_;
            }
            unit.col = parse_col();
            expect(")");
            if (is_block) expect(")");
            return unit;
        }
        if (at("distinct")) {
            unit.distinct = true;
            ++idx_;
        }
        unit.col = parse_col();
        if (is_block) expect(")");
        return unit;
    }

    std::string parse_col() {
        if (done()) fail("expected column");
        const GTok& t = cur();
        if (t.text == "*") {
            ++idx_;
            return "*";
        }
        if (!is_name_token()) fail("expected column, found '" + t.text + "'");
        ++idx_;
        return t.text;
    }

    GValUnit parse_val_unit() {
        bool is_block = false;
        if (at("(")) {
            is_block = true;
            ++idx_;
        }
        GValUnit unit;
        unit.a = parse_col_unit();
        if (!done() && cur().kind == TokenKind::Operator &&
            index_of(kUnitOps, cur().text) > 0) {
            unit.unit_op = index_of(kUnitOps, cur().text);
            ++idx_;
            unit.b = parse_col_unit();
        }
        if (is_block) expect(")");
        return unit;
    }

    GValue parse_value() {
        GValue value;
        bool is_block = false;
        if (at("(")) {
            is_block = true;
            ++idx_;
        }
        if (at("select")) {
            value.kind = GValue::Kind::Sql;
            value.sql = std::make_unique<GSql>(parse_sql());
        } else if (!done() && cur().kind == TokenKind::Literal) {
            char first = cur().text.empty() ? '\0' : cur().text[0];
            value.kind = (first == '\'' || first == '"') ? GValue::Kind::String
                                                         : GValue::Kind::Number;
            ++idx_;
        } else {
            value.kind = GValue::Kind::Column;
            value.col = parse_col_unit();
        }
        if (is_block) expect(")");
        return value;
    }

    GCondList parse_condition() {
        GCondList list;
        while (!done()) {
            GCond cond;
            cond.val_unit = parse_val_unit();
            if (at("not")) {
                cond.not_op = true;
                ++idx_;
            }
            if (done() || index_of(kWhereOps, cur().text) < 0)
                fail("expected condition operator");
            cond.op_id = index_of(kWhereOps, cur().text);
            ++idx_;
            if (cond.op_id == kOpBetween) {
                cond.val1 = parse_value();
                expect("and");
                cond.val2 = parse_value();
            } else if (kWhereOps[cond.op_id] == "is") {
                // "is [not] null" is folded into a plain column value
                if (at("not")) ++idx_;
                cond.val1 = parse_value();
            } else {
                cond.val1 = parse_value();
            }
            list.conds.push_back(std::move(cond));
            if (done() || at_clause_boundary() || kJoinKeywords.count(cur().text)) break;
            if (kCondOps.count(cur().text)) {
                list.connectors.push_back(cur().text);
                ++idx_;
                continue;
            }
            break;
        }
        return list;
    }

    void parse_from(GSql& sql) {
        expect("from");
        while (!done()) {
            bool is_block = false;
            if (at("(")) {
                is_block = true;
                ++idx_;
            }
            if (at("select")) {
                auto nested = std::make_unique<GSql>(parse_sql());
                (void)nested;  // table units of subquery type only contribute to the count
                sql.table_unit_count++;
            } else {
                if (at("join")) ++idx_;
                if (!is_name_token()) fail("expected table name");
                ++idx_;
                if (at("as")) {
                    ++idx_;
                    if (!is_name_token()) fail("expected alias after 'as'");
                    ++idx_;
                }
                sql.table_unit_count++;
            }
            if (at("on")) {
                ++idx_;
                GCondList conds = parse_condition();
                if (!sql.from_conds.conds.empty()) sql.from_conds.connectors.push_back("and");
                for (auto& c : conds.conds) sql.from_conds.conds.push_back(std::move(c));
                for (auto& k : conds.connectors) sql.from_conds.connectors.push_back(k);
            }
            if (is_block) expect(")");
            if (at_clause_boundary()) break;
            if (at(",")) {
                ++idx_;
                continue;
            }
            if (at("join")) continue;
            if (done()) break;
            fail("unexpected token in FROM clause: '" + cur().text + "'");
        }
    }

    void parse_select(GSql& sql) {
        expect("select");
        if (at("distinct")) {
            sql.select_distinct = true;
            ++idx_;
        }
        while (!done() && !kClauseKeywords.count(cur().text) && !at(")") && !at(";")) {
            int agg = 0;
            if (index_of(kAggOps, cur().text) > 0 && idx_ + 1 < toks_.size() &&
                toks_[idx_ + 1].text == "(") {
                agg = index_of(kAggOps, cur().text);
                ++idx_;
            }
            GValUnit unit = parse_val_unit();
            sql.select_units.emplace_back(agg, std::move(unit));
            if (at(",")) {
                ++idx_;
                continue;
            }
            break;
        }
        if (sql.select_units.empty()) fail("empty select list");
    }

    void parse_group_by(GSql& sql) {
        if (!at("group")) return;
        ++idx_;
        expect("by");
        while (!done() && !at_clause_boundary() && !at("having")) {
            sql.group_by.push_back(parse_col_unit());
            if (at(",")) {
                ++idx_;
                continue;
            }
            break;
        }
    }

    void parse_order_by(GSql& sql) {
        if (!at("order")) return;
        sql.has_order = true;
        ++idx_;
        expect("by");
        while (!done() && !at_clause_boundary()) {
            sql.order_units.push_back(parse_val_unit());
            if (!done() && kOrderOps.count(cur().text)) ++idx_;
            if (at(",")) {
                ++idx_;
                continue;
            }
            break;
        }
    }

    void parse_limit(GSql& sql) {
        if (!at("limit")) return;
        ++idx_;
        sql.has_limit = true;
        if (done() || cur().kind != TokenKind::Literal) fail("expected limit count");
        ++idx_;
    }

    GSql parse_sql() {
        GSql sql;
        parse_select(sql);
        parse_from(sql);
        if (at("where")) {
            ++idx_;
            sql.where = parse_condition();
        }
        parse_group_by(sql);
        if (at("having")) {
            ++idx_;
            sql.having = parse_condition();
        }
        parse_order_by(sql);
        parse_limit(sql);
        skip_semicolons();
        if (!done() && kSqlOps.count(cur().text)) {
            std::string op = cur().text;
            ++idx_;
            if (at("all")) ++idx_;
            auto nested = std::make_unique<GSql>(parse_sql());
            if (op == "intersect") sql.op_intersect = std::move(nested);
            else if (op == "union") sql.op_union = std::move(nested);
            else sql.op_except = std::move(nested);
        }
        return sql;
    }

    std::vector<GTok> toks_;
    size_t idx_ = 0;
};

GSql parse_spider_sql(std::string_view text) {
    std::vector<Token> raw = tokenize(text);
    std::vector<GTok> toks;
    toks.reserve(raw.size());
    for (auto& t : raw) {
        std::string lowered = t.text;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (lowered == "<>") lowered = "!=";
        toks.push_back({std::move(lowered), t.kind});
    }
    GrammarParser parser(std::move(toks));
    return parser.parse();
}

// --- component counting, mirroring the reference tallies ---

std::vector<const GCond*> all_cond_units(const GSql& sql) {
    std::vector<const GCond*> units;
    for (const auto& c : sql.from_conds.conds) units.push_back(&c);
    for (const auto& c : sql.where.conds) units.push_back(&c);
    for (const auto& c : sql.having.conds) units.push_back(&c);
    return units;
}

int count_component1(const GSql& sql) {
    int count = 0;
    if (!sql.where.empty()) count++;
    if (!sql.group_by.empty()) count++;
    if (sql.has_order) count++;
    if (sql.has_limit) count++;
    if (sql.table_unit_count > 0) count += sql.table_unit_count - 1;
    for (const auto& k : sql.from_conds.connectors)
        if (k == "or") count++;
    for (const auto& k : sql.where.connectors)
        if (k == "or") count++;
    for (const auto& k : sql.having.connectors)
        if (k == "or") count++;
    for (const GCond* c : all_cond_units(sql))
        if (c->op_id == kOpLike) count++;
    return count;
}

int count_component2(const GSql& sql) {
    int nested = 0;
    for (const GCond* c : all_cond_units(sql)) {
        if (c->val1.kind == GValue::Kind::Sql) nested++;
        if (c->val2.kind == GValue::Kind::Sql) nested++;
    }
    if (sql.op_intersect) nested++;
    if (sql.op_union) nested++;
    if (sql.op_except) nested++;
    return nested;
}

int count_others(const GSql& sql) {
    int count = 0;
    // The reference tally applies one presence test per unit shape: aggregate
    // ops in the select list, NOT markers on where/having conditions, and
    // arithmetic ops in order-by expressions all feed the same counter.
    int agg_count = 0;
    for (const auto& [agg, unit] : sql.select_units)
        if (agg != 0) agg_count++;
    for (const auto& c : sql.where.conds)
        if (c.not_op) agg_count++;
    for (const auto& g : sql.group_by)
        if (g.agg != 0) agg_count++;
    for (const auto& c : sql.having.conds)
        if (c.not_op) agg_count++;
    for (const auto& u : sql.order_units)
        if (u.unit_op != 0) agg_count++;
    if (agg_count > 1) count++;
    if (sql.select_units.size() > 1) count++;
    if (sql.where.conds.size() + sql.where.connectors.size() > 1) count++;
    if (sql.group_by.size() > 1) count++;
    return count;
}

Difficulty bucket(int c1, int c2, int others) {
    if (c1 <= 1 && others == 0 && c2 == 0) return Difficulty::Easy;
    if ((others <= 2 && c1 <= 1 && c2 == 0) || (c1 <= 2 && others < 2 && c2 == 0))
        return Difficulty::Medium;
    if ((others > 2 && c1 <= 2 && c2 == 0) || (c1 > 2 && c1 <= 3 && others <= 2 && c2 == 0) ||
        (c1 <= 1 && others == 0 && c2 <= 1))
        return Difficulty::Hard;
    return Difficulty::Extra;
}

}  // namespace

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
        case Difficulty::Extra: return "extra";
    }
    return "extra";
}

Difficulty difficulty_from_string(std::string_view s) {
    if (s == "easy") return Difficulty::Easy;
    if (s == "medium") return Difficulty::Medium;
    if (s == "hard") return Difficulty::Hard;
    if (s == "extra") return Difficulty::Extra;
    throw Error("unknown difficulty label: " + std::string(s));
}

HardnessCounts hardness_counts(std::string_view sql) {
    GSql parsed = parse_spider_sql(sql);
    return {count_component1(parsed), count_component2(parsed), count_others(parsed)};
}

Difficulty get_category(std::string_view sql) {
    HardnessCounts c = hardness_counts(sql);
    return bucket(c.component1, c.component2, c.others);
}

Difficulty get_category_or_extra(std::string_view sql, bool* degraded) {
    if (degraded) *degraded = false;
    try {
        return get_category(sql);
    } catch (const ParseError&) {
        if (degraded) *degraded = true;
        return Difficulty::Extra;
    }
}

}  // namespace t2s::syntax
