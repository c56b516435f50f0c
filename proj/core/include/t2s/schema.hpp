#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "t2s/errors.hpp"

namespace t2s::llm {
class CompletionClient;
}

namespace t2s::schema {

struct Column {
    std::string name;
    std::string declared_type;  // kept verbatim from the source
};

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::string> primary_key;  // column names, key order
};

struct ForeignKey {
    std::string from_table;  // referencing side
    std::string from_column;
    std::string to_table;  // referenced side
    std::string to_column;

    bool operator==(const ForeignKey&) const = default;
};

struct DatabaseSchema {
    std::string db_id;
    std::vector<Table> tables;
    std::vector<ForeignKey> foreign_keys;
    // optional per-table sample rows (values stringified), for description prompts
    std::map<std::string, std::vector<std::vector<std::string>>> sample_rows;

    const Table* find_table(std::string_view name) const;  // case-insensitive
    const Column* find_column(std::string_view table, std::string_view column) const;
    size_t column_count() const;
};

/// Introspect a SQLite database file. FK endpoint names are normalized to the
/// declared table/column spelling. sample_row_limit > 0 additionally reads up
/// to that many rows per table.
DatabaseSchema load_schema_from_sqlite(const std::string& path, int sample_row_limit = 0);

/// All schemas from a Spider-format tables.json file, in file order.
std::vector<DatabaseSchema> load_schemas_from_tables_json(const std::string& path);

/// One schema from tables.json by db_id. Throws SchemaError when absent.
DatabaseSchema load_schema_from_tables_json(const std::string& path, std::string_view db_id);

/// Map a declared type onto the coarse buckets used for structural
/// comparison: number, text, boolean, time, others.
std::string normalize_type(std::string_view declared);

/// Case-folded, type-normalized equality on names, types, primary keys and
/// foreign keys. Sample rows are ignored.
bool structurally_equal(const DatabaseSchema& a, const DatabaseSchema& b);

/// `table : col1, col2, ... | table2 : ...`, names lowercased, schema order.
std::string to_text_sequence(const DatabaseSchema& schema);

/// Per-column one-line definitions, keyed case-insensitively.
class ColumnDescriptions {
public:
    ColumnDescriptions() = default;
    explicit ColumnDescriptions(std::string provenance) : provenance_(std::move(provenance)) {}

    void set(std::string_view table, std::string_view column, std::string description);
    const std::string* find(std::string_view table, std::string_view column) const;
    size_t size() const { return entries_.size(); }
    const std::string& provenance() const { return provenance_; }

private:
    std::map<std::pair<std::string, std::string>, std::string> entries_;  // lowercased keys
    std::string provenance_;
};

/// Load fixture descriptions from a JSON file shaped
/// {"<db_id>": {"<table>": {"<column>": "<description>", ...}, ...}, ...}.
ColumnDescriptions descriptions_from_json_file(const std::string& path, std::string_view db_id);

/// Write-through cache for generated descriptions, stored as JSON keyed by
/// (db_id, table, column).
class DescriptionCache {
public:
    explicit DescriptionCache(std::string path);
    const std::string* find(std::string_view db_id, std::string_view table,
                            std::string_view column) const;
    void put(std::string_view db_id, std::string_view table, std::string_view column,
             std::string description);

private:
    void save() const;
    std::string path_;
    std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> data_;
};

/// Ask the completion client for a one-line definition of every column, one
/// column per request at temperature 0. Cache hits skip the client entirely.
/// Client failures raise LlmUnavailable; callers may proceed unaugmented.
ColumnDescriptions generate_column_descriptions(const DatabaseSchema& schema,
                                                llm::CompletionClient& client,
                                                const std::string& model_tag,
                                                DescriptionCache* cache = nullptr);

/// One CREATE TABLE block per table, gymnast-listing layout:
///   CREATE TABLE IF NOT EXISTS "name" (
///       "Col" type,
///       PRIMARY KEY ("Col"),
///       FOREIGN KEY ("Col") REFERENCES "other"("Col")
///   closing `);`, blocks joined by newline. With inline_comments, each column
/// line gains `, -- description` before its separator.
std::string to_create_sequence(const DatabaseSchema& schema,
                               const ColumnDescriptions* inline_comments = nullptr);

struct OntologyPath {
    std::vector<ForeignKey> edges;  // consecutive edges chain referenced -> referencing
};

struct OntologyOptions {
    bool prune_subpaths = true;  // keep only paths not contained in a longer kept path
    size_t max_path_length = 10;
};

struct OntologySummary {
    std::vector<OntologyPath> paths;  // sorted by edge count descending
    std::string rendered;             // full block comment, empty when no paths
    bool truncated = false;           // the length cap cut enumeration short
};

/// Render one path as `ref_table.ref_col -> fk_table.fk_col, ...`, lowercase.
std::string render_ontology_path(const OntologyPath& path);

/// Enumerate simple directed foreign-key paths (each edge oriented
/// referenced -> referencing, no table revisited), sort them longest first
/// (length ties on the rendered string), and optionally drop any path that is
/// a contiguous subpath of an earlier-kept one.
OntologySummary build_ontology_summary(const DatabaseSchema& schema,
                                       const OntologyOptions& options = {});

}  // namespace t2s::schema
