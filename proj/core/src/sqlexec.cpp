#include "t2s/sqlexec.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "t2s/sqlsyntax.hpp"

namespace t2s::exec {

Value Value::null() { return {}; }
Value Value::integer(int64_t v) {
    Value out;
    out.kind = Kind::Int;
    out.i = v;
    return out;
}
Value Value::real(double v) {
    Value out;
    out.kind = Kind::Real;
    out.r = v;
    return out;
}
Value Value::text(std::string v) {
    Value out;
    out.kind = Kind::Text;
    out.s = std::move(v);
    return out;
}
Value Value::blob(std::string hex) {
    Value out;
    out.kind = Kind::Blob;
    out.s = std::move(hex);
    return out;
}

namespace {

bool is_number(const Value& v) {
    return v.kind == Value::Kind::Int || v.kind == Value::Kind::Real;
}

double as_double(const Value& v) {
    return v.kind == Value::Kind::Int ? double(v.i) : v.r;
}

// strict total order used to sort rows before multiset comparison
int compare_values(const Value& a, const Value& b) {
    auto rank = [](const Value& v) {
        switch (v.kind) {
            case Value::Kind::Null: return 0;
            case Value::Kind::Int:
            case Value::Kind::Real: return 1;
            case Value::Kind::Text: return 2;
            case Value::Kind::Blob: return 3;
        }
        return 4;
    };
    if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
    switch (a.kind) {
        case Value::Kind::Null: return 0;
        case Value::Kind::Int:
        case Value::Kind::Real: {
            double x = as_double(a), y = as_double(b);
            if (x < y) return -1;
            if (x > y) return 1;
            return 0;
        }
        default:
            return a.s.compare(b.s) < 0 ? -1 : (a.s == b.s ? 0 : 1);
    }
}

bool row_less(const std::vector<Value>& a, const std::vector<Value>& b) {
    for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        int c = compare_values(a[i], b[i]);
        if (c != 0) return c < 0;
    }
    return a.size() < b.size();
}

bool rows_match(const std::vector<Value>& a, const std::vector<Value>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!values_match(a[i], b[i])) return false;
    return true;
}

// a top-level ORDER BY, i.e. one outside any parenthesized subquery
bool has_top_level_order_by(const std::string& sql) {
    std::vector<syntax::Token> toks;
    try {
        toks = syntax::tokenize(sql);
    } catch (const ParseError&) {
        return false;
    }
    long depth = 0;
    for (size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].kind == syntax::TokenKind::Punct) {
            if (toks[i].text == "(") ++depth;
            if (toks[i].text == ")") --depth;
            continue;
        }
        if (depth == 0 && toks[i].kind == syntax::TokenKind::Keyword &&
            toks[i].text == "order" && toks[i + 1].text == "by")
            return true;
    }
    return false;
}

struct Deadline {
    std::chrono::steady_clock::time_point at;
};

int progress_callback(void* ctx) {
    auto* deadline = static_cast<Deadline*>(ctx);
    return std::chrono::steady_clock::now() > deadline->at ? 1 : 0;
}

}  // namespace

bool values_match(const Value& a, const Value& b) {
    if (is_number(a) && is_number(b)) {
        if (a.kind == Value::Kind::Int && b.kind == Value::Kind::Int) return a.i == b.i;
        double x = as_double(a), y = as_double(b);
        if (x == y) return true;
        return std::fabs(x - y) <= 1e-6 * std::max(std::fabs(x), std::fabs(y));
    }
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Value::Kind::Null: return true;
        case Value::Kind::Text:
        case Value::Kind::Blob: return a.s == b.s;
        default: return false;
    }
}

std::string spider_db_path(const std::string& database_dir, const std::string& db_id) {
    return database_dir + "/" + db_id + "/" + db_id + ".sqlite";
}

ExecutionOutcome execute_sql(const std::string& db_path, const std::string& sql,
                             const ExecOptions& options) {
    if (!std::filesystem::exists(db_path)) throw DbMissing("database file missing: " + db_path);

    ExecutionOutcome outcome;
    outcome.ordered = has_top_level_order_by(sql);

    sqlite3* db = nullptr;
    if (sqlite3_open_v2(db_path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
        outcome.error = db ? sqlite3_errmsg(db) : "cannot open database";
        if (db) sqlite3_close(db);
        return outcome;
    }

    Deadline deadline{std::chrono::steady_clock::now() +
                      std::chrono::milliseconds(options.timeout_ms)};
    // check roughly every few thousand VM ops
    sqlite3_progress_handler(db, 4000, progress_callback, &deadline);

    sqlite3_stmt* stmt = nullptr;
    int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr);
    if (rc != SQLITE_OK || stmt == nullptr) {
        outcome.error = stmt == nullptr && rc == SQLITE_OK ? "empty statement"
                                                           : sqlite3_errmsg(db);
        if (stmt) sqlite3_finalize(stmt);
        sqlite3_close(db);
        return outcome;
    }

    while (true) {
        rc = sqlite3_step(stmt);
        if (rc == SQLITE_ROW) {
            std::vector<Value> row;
            int cols = sqlite3_column_count(stmt);
            row.reserve(cols);
            for (int i = 0; i < cols; ++i) {
                switch (sqlite3_column_type(stmt, i)) {
                    case SQLITE_INTEGER:
                        row.push_back(Value::integer(sqlite3_column_int64(stmt, i)));
                        break;
                    case SQLITE_FLOAT:
                        row.push_back(Value::real(sqlite3_column_double(stmt, i)));
                        break;
                    case SQLITE_TEXT: {
                        const unsigned char* text = sqlite3_column_text(stmt, i);
                        row.push_back(Value::text(reinterpret_cast<const char*>(text)));
                        break;
                    }
                    case SQLITE_BLOB: {
                        const auto* data =
                            static_cast<const unsigned char*>(sqlite3_column_blob(stmt, i));
                        int len = sqlite3_column_bytes(stmt, i);
                        std::string hex;
                        hex.reserve(size_t(len) * 2);
                        for (int b = 0; b < len; ++b) {
                            char buf[3];
                            std::snprintf(buf, sizeof buf, "%02x", data[b]);
                            hex += buf;
                        }
                        row.push_back(Value::blob(std::move(hex)));
                        break;
                    }
                    default:
                        row.push_back(Value::null());
                }
            }
            outcome.rows.push_back(std::move(row));
            continue;
        }
        if (rc == SQLITE_DONE) {
            outcome.ok = true;
        } else if (rc == SQLITE_INTERRUPT) {
            outcome.error = "statement timeout";
        } else {
            outcome.error = sqlite3_errmsg(db);
        }
        break;
    }
    if (!outcome.ok) outcome.rows.clear();
    sqlite3_finalize(stmt);
    sqlite3_close(db);
    return outcome;
}

bool results_match(const ExecutionOutcome& a, const ExecutionOutcome& b) {
    if (!a.ok || !b.ok) return false;
    if (a.rows.size() != b.rows.size()) return false;
    if (a.ordered || b.ordered) {
        for (size_t i = 0; i < a.rows.size(); ++i)
            if (!rows_match(a.rows[i], b.rows[i])) return false;
        return true;
    }
    // multiset comparison: sort with an exact total order, then pairwise
    // tolerant matching (near-ties that straddle the sort order are accepted
    // as a known limitation of tolerant multiset equality)
    auto sa = a.rows;
    auto sb = b.rows;
    std::sort(sa.begin(), sa.end(), row_less);
    std::sort(sb.begin(), sb.end(), row_less);
    for (size_t i = 0; i < sa.size(); ++i)
        if (!rows_match(sa[i], sb[i])) return false;
    return true;
}

AccuracyReport execution_accuracy(std::span<const std::string> predictions,
                                  std::span<const std::string> golds,
                                  std::span<const std::string> db_paths,
                                  std::span<const std::string> categories,
                                  const ExecOptions& options) {
    if (predictions.size() != golds.size() || predictions.size() != db_paths.size())
        throw Error("execution_accuracy: input lists must be aligned");
    if (!categories.empty() && categories.size() != predictions.size())
        throw Error("execution_accuracy: categories must align with predictions");

    AccuracyReport report;
    size_t matched = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        ExecutionOutcome pred = execute_sql(db_paths[i], predictions[i], options);
        ExecutionOutcome gold = execute_sql(db_paths[i], golds[i], options);
        bool match = results_match(pred, gold);
        report.matches.push_back(match);
        if (match) ++matched;
        if (!categories.empty()) {
            auto& bucket = report.by_category[categories[i]];
            bucket.total++;
            if (match) bucket.matched++;
        }
    }
    report.overall = predictions.empty() ? 0.0 : double(matched) / double(predictions.size());
    return report;
}

VoteTally majority_vote(std::span<const VoteEntry> bundle, const std::string& db_path,
                        const ExecOptions& options) {
    if (bundle.empty()) throw Error("majority_vote: empty bundle");

    VoteTally tally;
    tally.outcomes.reserve(bundle.size());
    for (const auto& entry : bundle)
        tally.outcomes.push_back(execute_sql(db_path, entry.prediction, options));

    for (size_t i = 0; i < bundle.size(); ++i) {
        if (!tally.outcomes[i].ok) continue;  // execution errors never vote
        bool placed = false;
        for (auto& group : tally.groups) {
            if (results_match(tally.outcomes[group.members.front()], tally.outcomes[i])) {
                group.members.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) tally.groups.push_back(VoteGroup{{i}});
    }

    if (tally.groups.empty()) {
        // everything errored: fall back to the largest shot count
        size_t best = 0;
        for (size_t i = 1; i < bundle.size(); ++i)
            if (bundle[i].n > bundle[best].n) best = i;
        tally.winner_group = std::nullopt;
        tally.winner_index = best;
        return tally;
    }

    auto group_max_n = [&](const VoteGroup& g) {
        int best = bundle[g.members.front()].n;
        for (size_t idx : g.members) best = std::max(best, bundle[idx].n);
        return best;
    };
    size_t winner = 0;
    for (size_t g = 1; g < tally.groups.size(); ++g) {
        const auto& cand = tally.groups[g];
        const auto& best = tally.groups[winner];
        if (cand.members.size() > best.members.size() ||
            (cand.members.size() == best.members.size() &&
             group_max_n(cand) > group_max_n(best)))
            winner = g;
    }
    tally.winner_group = winner;
    size_t winner_index = tally.groups[winner].members.front();
    for (size_t idx : tally.groups[winner].members)
        if (bundle[idx].n > bundle[winner_index].n) winner_index = idx;
    tally.winner_index = winner_index;
    return tally;
}

}  // namespace t2s::exec
