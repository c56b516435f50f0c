#include "t2s/schema.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "t2s/llm.hpp"
#include "t2s/sqlsyntax.hpp"

namespace t2s::schema {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string strip_quote_pair(const std::string& name) {
    if (name.size() >= 2) {
        char a = name.front(), b = name.back();
        if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`'))
            return name.substr(1, name.size() - 2);
    }
    return name;
}

std::string quote_ident(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        out += c;
        if (c == '"') out += c;
    }
    out += '"';
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

// RAII sqlite handle for introspection queries
class Db {
public:
    explicit Db(const std::string& path) {
        if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
            std::string msg = db_ ? sqlite3_errmsg(db_) : "open failed";
            if (db_) sqlite3_close(db_);
            throw SchemaError("cannot open database " + path + ": " + msg);
        }
    }
    ~Db() {
        if (db_) sqlite3_close(db_);
    }
    Db(const Db&) = delete;
    Db& operator=(const Db&) = delete;

    // run a query, return rows of stringified values (NULL -> "")
    std::vector<std::vector<std::string>> rows(const std::string& sql) {
        sqlite3_stmt* stmt = nullptr;
        if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
            throw SchemaError(std::string("introspection query failed: ") + sqlite3_errmsg(db_));
        std::vector<std::vector<std::string>> out;
        while (sqlite3_step(stmt) == SQLITE_ROW) {
            std::vector<std::string> row;
            int cols = sqlite3_column_count(stmt);
            for (int i = 0; i < cols; ++i) {
                const unsigned char* text = sqlite3_column_text(stmt, i);
                row.emplace_back(text ? reinterpret_cast<const char*>(text) : "");
            }
            out.push_back(std::move(row));
        }
        sqlite3_finalize(stmt);
        return out;
    }

private:
    sqlite3* db_ = nullptr;
};

// PRAGMA table_info canonicalizes recognized type names (int -> INT), so the
// verbatim spellings are recovered from the CREATE statement kept in
// sqlite_master. Returns lowercase column name -> declared type text.
std::map<std::string, std::string> declared_types_from_ddl(const std::string& create_sql) {
    std::map<std::string, std::string> out;
    std::vector<syntax::Token> toks;
    try {
        toks = syntax::tokenize(create_sql);
    } catch (const ParseError&) {
        return out;
    }
    // isolate the top-level parenthesized body
    size_t open = 0;
    while (open < toks.size() && toks[open].text != "(") ++open;
    if (open == toks.size()) return out;
    long depth = 0;
    std::vector<std::vector<syntax::Token>> items;
    std::vector<syntax::Token> current;
    for (size_t i = open; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind == syntax::TokenKind::Punct && t.text == "(") {
            ++depth;
            if (depth == 1) continue;
        }
        if (t.kind == syntax::TokenKind::Punct && t.text == ")") {
            --depth;
            if (depth == 0) break;
        }
        if (depth == 1 && t.kind == syntax::TokenKind::Punct && t.text == ",") {
            items.push_back(std::move(current));
            current.clear();
            continue;
        }
        current.push_back(t);
    }
    if (!current.empty()) items.push_back(std::move(current));

    static const std::set<std::string> constraint_starters = {
        "primary", "foreign", "unique", "check", "constraint"};
    static const std::set<std::string> type_enders = {
        "primary", "unique",   "not",     "default", "check",
        "collate", "references", "generated", "constraint", "as"};
    for (const auto& item : items) {
        if (item.empty()) continue;
        std::string name = item[0].text;
        if (item[0].kind == syntax::TokenKind::Literal) name = strip_quote_pair(name);
        if (constraint_starters.count(lower(name))) continue;
        std::string type;
        long inner = 0;
        for (size_t i = 1; i < item.size(); ++i) {
            const auto& t = item[i];
            if (inner == 0 && type_enders.count(lower(t.text))) break;
            if (t.kind == syntax::TokenKind::Punct && t.text == "(") ++inner;
            if (t.kind == syntax::TokenKind::Punct && t.text == ")") --inner;
            bool glue = t.text == "(" || t.text == ")" || t.text == "," ||
                        (!type.empty() && type.back() == '(');
            if (!type.empty() && !glue) type += ' ';
            type += t.text;
        }
        out[lower(name)] = type;
    }
    return out;
}

}  // namespace

const Table* DatabaseSchema::find_table(std::string_view name) const {
    std::string target = lower(name);
    for (const auto& t : tables)
        if (lower(t.name) == target) return &t;
    return nullptr;
}

const Column* DatabaseSchema::find_column(std::string_view table, std::string_view column) const {
    const Table* t = find_table(table);
    if (!t) return nullptr;
    std::string target = lower(column);
    for (const auto& c : t->columns)
        if (lower(c.name) == target) return &c;
    return nullptr;
}

size_t DatabaseSchema::column_count() const {
    size_t n = 0;
    for (const auto& t : tables) n += t.columns.size();
    return n;
}

DatabaseSchema load_schema_from_sqlite(const std::string& path, int sample_row_limit) {
    Db db(path);
    DatabaseSchema schema;
    {
        std::string id = path;
        size_t slash = id.find_last_of('/');
        if (slash != std::string::npos) id = id.substr(slash + 1);
        size_t dot = id.find_last_of('.');
        if (dot != std::string::npos) id = id.substr(0, dot);
        schema.db_id = id;
    }

    auto tables = db.rows(
        "SELECT name, sql FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%'");
    for (const auto& trow : tables) {
        Table table;
        table.name = trow[0];
        auto verbatim_types = declared_types_from_ddl(trow[1]);
        // cid, name, type, notnull, dflt_value, pk
        auto info = db.rows("PRAGMA table_info(" + quote_ident(table.name) + ")");
        std::vector<std::pair<int, std::string>> pk_cols;
        for (const auto& row : info) {
            std::string type = row[2];
            if (auto it = verbatim_types.find(lower(row[1])); it != verbatim_types.end())
                type = it->second;
            table.columns.push_back({row[1], type});
            int pk_pos = std::stoi(row[5].empty() ? "0" : row[5]);
            if (pk_pos > 0) pk_cols.emplace_back(pk_pos, row[1]);
        }
        std::sort(pk_cols.begin(), pk_cols.end());
        for (auto& [pos, name] : pk_cols) table.primary_key.push_back(name);
        schema.tables.push_back(std::move(table));
    }

    // PRAGMA foreign_key_list reports constraints most-recent-first; flip ids
    // so the rendered order matches declaration order.
    for (const auto& t : schema.tables) {
        auto fks = db.rows("PRAGMA foreign_key_list(" + quote_ident(t.name) + ")");
        // id, seq, table, from, to, on_update, on_delete, match
        std::vector<std::tuple<int, int, std::string, std::string, std::string>> entries;
        for (const auto& row : fks) {
            entries.emplace_back(std::stoi(row[0]), std::stoi(row[1]), row[2], row[3], row[4]);
        }
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
            return std::get<1>(a) < std::get<1>(b);
        });
        for (auto& [id, seq, ref_table, from_col, to_col] : entries) {
            ForeignKey fk;
            fk.from_table = t.name;
            fk.from_column = from_col;
            fk.to_table = ref_table;
            fk.to_column = to_col;
            schema.foreign_keys.push_back(std::move(fk));
        }
    }

    // normalize FK endpoint names to declared spellings and resolve implicit
    // referenced columns (references to a table's primary key)
    for (auto& fk : schema.foreign_keys) {
        const Table* to_table = schema.find_table(fk.to_table);
        if (!to_table)
            throw SchemaError("foreign key references unknown table " + fk.to_table + " in " +
                              schema.db_id);
        fk.to_table = to_table->name;
        if (fk.to_column.empty()) {
            if (to_table->primary_key.empty())
                throw SchemaError("implicit foreign key target has no primary key: " +
                                  fk.to_table);
            fk.to_column = to_table->primary_key.front();
        }
        if (const Column* c = schema.find_column(fk.to_table, fk.to_column))
            fk.to_column = c->name;
        else
            throw SchemaError("foreign key references unknown column " + fk.to_table + "." +
                              fk.to_column);
        if (const Column* c = schema.find_column(fk.from_table, fk.from_column))
            fk.from_column = c->name;
        else
            throw SchemaError("foreign key uses unknown column " + fk.from_table + "." +
                              fk.from_column);
    }

    if (sample_row_limit > 0) {
        for (const auto& t : schema.tables) {
            auto rows = db.rows("SELECT * FROM " + quote_ident(t.name) + " LIMIT " +
                                std::to_string(sample_row_limit));
            if (!rows.empty()) schema.sample_rows[t.name] = std::move(rows);
        }
    }
    return schema;
}

namespace {

DatabaseSchema schema_from_tables_entry(const json& entry) {
    DatabaseSchema schema;
    try {
        schema.db_id = entry.at("db_id").get<std::string>();
        const auto& table_names = entry.at("table_names_original");
        const auto& column_names = entry.at("column_names_original");
        const auto& column_types = entry.at("column_types");

        for (const auto& name : table_names) {
            Table t;
            t.name = name.get<std::string>();
            schema.tables.push_back(std::move(t));
        }
        // column 0 is the shared "*" pseudo-column
        std::vector<std::pair<int, std::string>> columns;  // global index -> (table, name)
        for (size_t i = 0; i < column_names.size(); ++i) {
            int table_idx = column_names[i].at(0).get<int>();
            std::string col_name = column_names[i].at(1).get<std::string>();
            columns.emplace_back(table_idx, col_name);
            if (table_idx < 0) continue;
            if (table_idx >= int(schema.tables.size()))
                throw SchemaError("column references unknown table index in " + schema.db_id);
            std::string type =
                i < column_types.size() ? column_types[i].get<std::string>() : std::string();
            schema.tables[table_idx].columns.push_back({col_name, type});
        }
        auto column_ref = [&](int idx) -> std::pair<std::string, std::string> {
            if (idx < 0 || idx >= int(columns.size()) || columns[idx].first < 0)
                throw SchemaError("bad column index in " + schema.db_id);
            return {schema.tables[columns[idx].first].name, columns[idx].second};
        };
        if (entry.contains("primary_keys")) {
            for (const auto& pk : entry["primary_keys"]) {
                std::vector<int> ids;
                if (pk.is_array())
                    for (const auto& v : pk) ids.push_back(v.get<int>());
                else
                    ids.push_back(pk.get<int>());
                for (int id : ids) {
                    auto [table, column] = column_ref(id);
                    schema.tables[columns[id].first].primary_key.push_back(column);
                }
            }
        }
        if (entry.contains("foreign_keys")) {
            for (const auto& pair : entry["foreign_keys"]) {
                auto [from_table, from_col] = column_ref(pair.at(0).get<int>());
                auto [to_table, to_col] = column_ref(pair.at(1).get<int>());
                schema.foreign_keys.push_back({from_table, from_col, to_table, to_col});
            }
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed tables.json entry: ") + e.what());
    }
    return schema;
}

}  // namespace

std::vector<DatabaseSchema> load_schemas_from_tables_json(const std::string& path) {
    json j = read_json_file(path);
    if (!j.is_array()) throw SchemaError("tables.json root must be an array: " + path);
    std::vector<DatabaseSchema> out;
    out.reserve(j.size());
    for (const auto& entry : j) out.push_back(schema_from_tables_entry(entry));
    return out;
}

DatabaseSchema load_schema_from_tables_json(const std::string& path, std::string_view db_id) {
    json j = read_json_file(path);
    if (!j.is_array()) throw SchemaError("tables.json root must be an array: " + path);
    for (const auto& entry : j) {
        if (entry.value("db_id", "") == db_id) return schema_from_tables_entry(entry);
    }
    throw SchemaError("db_id not found in " + path + ": " + std::string(db_id));
}

std::string normalize_type(std::string_view declared) {
    std::string t = lower(declared);
    if (auto paren = t.find('('); paren != std::string::npos) t = t.substr(0, paren);
    // trim
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    size_t start = 0;
    while (start < t.size() && std::isspace(static_cast<unsigned char>(t[start]))) ++start;
    t = t.substr(start);

    static const std::set<std::string> numbers = {"int",    "integer", "tinyint", "smallint",
                                                  "mediumint", "bigint", "number", "numeric",
                                                  "real",   "double",  "float",   "decimal"};
    static const std::set<std::string> texts = {"text", "varchar", "char", "character",
                                                "string", "clob", "nvarchar"};
    static const std::set<std::string> bools = {"bool", "boolean", "bit"};
    static const std::set<std::string> times = {"date", "datetime", "time", "timestamp", "year"};
    if (numbers.count(t)) return "number";
    if (texts.count(t)) return "text";
    if (bools.count(t)) return "boolean";
    if (times.count(t)) return "time";
    if (t.empty()) return "others";
    // prefix forms like "varchar2", "double precision"
    if (t.rfind("varchar", 0) == 0 || t.rfind("char", 0) == 0) return "text";
    if (t.rfind("double", 0) == 0 || t.rfind("int", 0) == 0 || t.rfind("float", 0) == 0)
        return "number";
    return "others";
}

bool structurally_equal(const DatabaseSchema& a, const DatabaseSchema& b) {
    if (a.tables.size() != b.tables.size()) return false;
    for (size_t i = 0; i < a.tables.size(); ++i) {
        const Table& ta = a.tables[i];
        const Table& tb = b.tables[i];
        if (lower(ta.name) != lower(tb.name)) return false;
        if (ta.columns.size() != tb.columns.size()) return false;
        for (size_t c = 0; c < ta.columns.size(); ++c) {
            if (lower(ta.columns[c].name) != lower(tb.columns[c].name)) return false;
            if (normalize_type(ta.columns[c].declared_type) !=
                normalize_type(tb.columns[c].declared_type))
                return false;
        }
        std::set<std::string> pa, pb;
        for (const auto& k : ta.primary_key) pa.insert(lower(k));
        for (const auto& k : tb.primary_key) pb.insert(lower(k));
        if (pa != pb) return false;
    }
    auto fk_set = [](const DatabaseSchema& s) {
        std::set<std::string> out;
        for (const auto& fk : s.foreign_keys)
            out.insert(lower(fk.from_table) + "." + lower(fk.from_column) + ">" +
                       lower(fk.to_table) + "." + lower(fk.to_column));
        return out;
    };
    return fk_set(a) == fk_set(b);
}

std::string to_text_sequence(const DatabaseSchema& schema) {
    std::string out;
    for (size_t i = 0; i < schema.tables.size(); ++i) {
        const Table& t = schema.tables[i];
        if (i) out += " | ";
        out += lower(t.name) + " : ";
        for (size_t c = 0; c < t.columns.size(); ++c) {
            if (c) out += ", ";
            out += lower(t.columns[c].name);
        }
    }
    return out;
}

void ColumnDescriptions::set(std::string_view table, std::string_view column,
                             std::string description) {
    entries_[{lower(table), lower(column)}] = std::move(description);
}

const std::string* ColumnDescriptions::find(std::string_view table,
                                            std::string_view column) const {
    auto it = entries_.find({lower(table), lower(column)});
    return it == entries_.end() ? nullptr : &it->second;
}

ColumnDescriptions descriptions_from_json_file(const std::string& path, std::string_view db_id) {
    json j = read_json_file(path);
    ColumnDescriptions out("fixture");
    auto it = j.find(std::string(db_id));
    if (it == j.end()) throw SchemaError("no descriptions for db " + std::string(db_id));
    for (auto& [table, cols] : it->items())
        for (auto& [col, desc] : cols.items()) out.set(table, col, desc.get<std::string>());
    return out;
}

DescriptionCache::DescriptionCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    json j;
    in >> j;
    for (auto& [db, tables] : j.items())
        for (auto& [table, cols] : tables.items())
            for (auto& [col, desc] : cols.items())
                data_[db][table][col] = desc.get<std::string>();
}

const std::string* DescriptionCache::find(std::string_view db_id, std::string_view table,
                                          std::string_view column) const {
    auto d = data_.find(std::string(db_id));
    if (d == data_.end()) return nullptr;
    auto t = d->second.find(lower(table));
    if (t == d->second.end()) return nullptr;
    auto c = t->second.find(lower(column));
    return c == t->second.end() ? nullptr : &c->second;
}

void DescriptionCache::put(std::string_view db_id, std::string_view table,
                           std::string_view column, std::string description) {
    data_[std::string(db_id)][lower(table)][lower(column)] = std::move(description);
    save();
}

void DescriptionCache::save() const {
    json j = json::object();
    for (const auto& [db, tables] : data_) {
        json jt = json::object();
        for (const auto& [table, cols] : tables) {
            json jc = json::object();
            for (const auto& [col, desc] : cols) jc[col] = desc;
            jt[table] = std::move(jc);
        }
        j[db] = std::move(jt);
    }
    std::ofstream out(path_);
    out << j.dump(2) << '\n';
}

ColumnDescriptions generate_column_descriptions(const DatabaseSchema& schema,
                                                llm::CompletionClient& client,
                                                const std::string& model_tag,
                                                DescriptionCache* cache) {
    ColumnDescriptions out(model_tag);
    for (const auto& table : schema.tables) {
        std::string columns_list;
        for (size_t i = 0; i < table.columns.size(); ++i) {
            if (i) columns_list += ", ";
            columns_list += table.columns[i].name;
        }
        std::string rows_text = "none";
        if (auto it = schema.sample_rows.find(table.name); it != schema.sample_rows.end()) {
            rows_text.clear();
            for (size_t r = 0; r < it->second.size(); ++r) {
                if (r) rows_text += "; ";
                rows_text += "(";
                for (size_t v = 0; v < it->second[r].size(); ++v) {
                    if (v) rows_text += ", ";
                    rows_text += it->second[r][v];
                }
                rows_text += ")";
            }
        }
        for (const auto& col : table.columns) {
            if (cache) {
                if (const std::string* hit = cache->find(schema.db_id, table.name, col.name)) {
                    out.set(table.name, col.name, *hit);
                    continue;
                }
            }
            llm::CompletionRequest req;
            req.model_tag = model_tag;
            req.prompt = "Given table " + table.name + " with columns <" + columns_list +
                         "> and sample rows <" + rows_text +
                         ">, write a one-line definition of column " + col.name + ".";
            req.max_tokens = 64;
            req.temperature = 0.0;
            std::string text;
            try {
                text = client.complete(req).text;
            } catch (const LlmError& e) {
                throw LlmUnavailable(std::string("description generation failed: ") + e.what(),
                                     e.request_id);
            }
            // keep the first non-empty line, trimmed
            size_t begin = text.find_first_not_of(" \t\r\n");
            if (begin == std::string::npos) begin = 0;
            size_t end = text.find('\n', begin);
            std::string line = text.substr(begin, end == std::string::npos ? end : end - begin);
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (cache) cache->put(schema.db_id, table.name, col.name, line);
            out.set(table.name, col.name, line);
        }
    }
    return out;
}

std::string to_create_sequence(const DatabaseSchema& schema,
                               const ColumnDescriptions* inline_comments) {
    std::string out;
    for (size_t ti = 0; ti < schema.tables.size(); ++ti) {
        const Table& t = schema.tables[ti];
        if (ti) out += "\n";
        out += "CREATE TABLE IF NOT EXISTS " + quote_ident(t.name) + " (\n";

        std::vector<ForeignKey> fks;
        for (const auto& fk : schema.foreign_keys)
            if (lower(fk.from_table) == lower(t.name)) fks.push_back(fk);

        size_t line_count = t.columns.size() + (t.primary_key.empty() ? 0 : 1) + fks.size();
        size_t line = 0;
        for (const auto& col : t.columns) {
            ++line;
            out += "    " + quote_ident(col.name);
            if (!col.declared_type.empty()) out += " " + col.declared_type;
            if (line < line_count) out += ",";
            if (inline_comments) {
                if (const std::string* desc = inline_comments->find(t.name, col.name))
                    out += " -- " + *desc;
            }
            out += "\n";
        }
        if (!t.primary_key.empty()) {
            ++line;
            out += "    PRIMARY KEY (";
            for (size_t i = 0; i < t.primary_key.size(); ++i) {
                if (i) out += ", ";
                out += quote_ident(t.primary_key[i]);
            }
            out += ")";
            if (line < line_count) out += ",";
            out += "\n";
        }
        for (size_t fi = 0; fi < fks.size(); ++fi) {
            ++line;
            out += "    FOREIGN KEY (" + quote_ident(fks[fi].from_column) + ") REFERENCES " +
                   quote_ident(fks[fi].to_table) + "(" + quote_ident(fks[fi].to_column) + ")";
            if (line < line_count) out += ",";
            out += "\n";
        }
        out += ");";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ontology summary
// ---------------------------------------------------------------------------

std::string render_ontology_path(const OntologyPath& path) {
    std::string out;
    for (size_t i = 0; i < path.edges.size(); ++i) {
        const ForeignKey& e = path.edges[i];
        if (i) out += ", ";
        out += lower(e.to_table) + "." + lower(e.to_column) + " -> " + lower(e.from_table) +
               "." + lower(e.from_column);
    }
    return out;
}

OntologySummary build_ontology_summary(const DatabaseSchema& schema,
                                       const OntologyOptions& options) {
    OntologySummary summary;

    // usable edges: referenced table -> referencing table, self-references
    // cannot take part in a simple path between distinct tables
    std::vector<const ForeignKey*> edges;
    for (const auto& fk : schema.foreign_keys)
        if (lower(fk.from_table) != lower(fk.to_table)) edges.push_back(&fk);
    if (edges.empty()) return summary;

    std::map<std::string, std::vector<size_t>> outgoing;  // referenced table -> edge indices
    for (size_t i = 0; i < edges.size(); ++i) outgoing[lower(edges[i]->to_table)].push_back(i);

    std::vector<std::vector<size_t>> all_paths;  // sequences of edge indices
    std::vector<size_t> current;
    std::set<std::string> visited;

    std::function<void(const std::string&)> extend = [&](const std::string& at_table) {
        if (current.size() >= options.max_path_length) {
            summary.truncated = true;
            return;
        }
        auto it = outgoing.find(at_table);
        if (it == outgoing.end()) return;
        for (size_t edge_idx : it->second) {
            const ForeignKey* e = edges[edge_idx];
            std::string next_table = lower(e->from_table);
            if (visited.count(next_table)) continue;
            current.push_back(edge_idx);
            visited.insert(next_table);
            all_paths.push_back(current);
            extend(next_table);
            visited.erase(next_table);
            current.pop_back();
        }
    };

    std::set<std::string> roots;
    for (const auto* e : edges) roots.insert(lower(e->to_table));
    for (const auto& root : roots) {
        visited = {root};
        current.clear();
        extend(root);
    }

    struct Candidate {
        std::vector<size_t> edge_indices;
        std::string rendered;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(all_paths.size());
    for (auto& p : all_paths) {
        OntologyPath path;
        for (size_t idx : p) path.edges.push_back(*edges[idx]);
        candidates.push_back({std::move(p), render_ontology_path(path)});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.edge_indices.size() != b.edge_indices.size())
            return a.edge_indices.size() > b.edge_indices.size();
        return a.rendered < b.rendered;
    });

    auto contains_subpath = [](const std::vector<size_t>& longer,
                               const std::vector<size_t>& shorter) {
        if (shorter.size() > longer.size()) return false;
        for (size_t off = 0; off + shorter.size() <= longer.size(); ++off) {
            bool match = true;
            for (size_t i = 0; i < shorter.size(); ++i)
                if (longer[off + i] != shorter[i]) {
                    match = false;
                    break;
                }
            if (match) return true;
        }
        return false;
    };

    std::vector<Candidate> kept;
    for (auto& cand : candidates) {
        if (options.prune_subpaths) {
            bool subsumed = false;
            for (const auto& k : kept)
                if (contains_subpath(k.edge_indices, cand.edge_indices)) {
                    subsumed = true;
                    break;
                }
            if (subsumed) continue;
        }
        kept.push_back(std::move(cand));
    }

    for (auto& cand : kept) {
        OntologyPath path;
        for (size_t idx : cand.edge_indices) path.edges.push_back(*edges[idx]);
        summary.paths.push_back(std::move(path));
    }
    if (!summary.paths.empty()) {
        std::string block = "/* \nDatabase ontology:\n";
        for (const auto& cand : kept) block += cand.rendered + "\n";
        block += "*/";
        summary.rendered = std::move(block);
    }
    return summary;
}

}  // namespace t2s::schema
