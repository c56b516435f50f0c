#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "t2s/llm.hpp"
#include "t2s/schema.hpp"

using namespace t2s;
using namespace t2s::schema;
namespace fs = std::filesystem;

namespace {

struct Env {
    fs::path root = testsup::build_spider_layout("schema");
    std::string dbdir() const { return (root / "database").string(); }
    std::string db(const std::string& id) const {
        return dbdir() + "/" + id + "/" + id + ".sqlite";
    }
};

Env& env() {
    static Env e;
    return e;
}

}  // namespace

TEST_CASE("load gymnast schema from sqlite") {
    auto schema = load_schema_from_sqlite(env().db("gymnast"));
    CHECK(schema.db_id == "gymnast");
    REQUIRE(schema.tables.size() == 2);
    CHECK(schema.tables[0].name == "gymnast");
    CHECK(schema.tables[0].columns.size() == 8);
    CHECK(schema.tables[0].columns[0].name == "Gymnast_ID");
    CHECK(schema.tables[0].columns[0].declared_type == "int");
    CHECK(schema.tables[0].primary_key == std::vector<std::string>{"Gymnast_ID"});
    REQUIRE(schema.foreign_keys.size() == 1);
    CHECK(schema.foreign_keys[0] ==
          ForeignKey{"gymnast", "Gymnast_ID", "people", "People_ID"});
}

TEST_CASE("load cars schema from sqlite preserves order and chain") {
    auto schema = load_schema_from_sqlite(env().db("cars"));
    REQUIRE(schema.tables.size() == 6);
    std::vector<std::string> names;
    for (const auto& t : schema.tables) names.push_back(t.name);
    CHECK(names == std::vector<std::string>{"continents", "countries", "car_makers",
                                            "model_list", "car_names", "cars_data"});
    CHECK(schema.foreign_keys.size() == 5);
    CHECK(schema.tables[0].columns[0].declared_type == "INTEGER");
}

TEST_CASE("empty database loads as an empty schema") {
    auto dir = testsup::temp_dir("empty");
    std::string path = (dir / "empty.sqlite").string();
    testsup::exec_all(path, {"PRAGMA user_version = 0;"});
    auto schema = load_schema_from_sqlite(path);
    CHECK(schema.tables.empty());
    CHECK(schema.foreign_keys.empty());
}

TEST_CASE("missing database raises") {
    CHECK_THROWS_AS(load_schema_from_sqlite("/nonexistent/nope.sqlite"), SchemaError);
}

TEST_CASE("tables.json and sqlite loads are structurally equal") {
    std::string tables_path = testsup::fixture_dir() + "/tables.json";
    for (const char* db_id : {"gymnast", "department_management", "cars", "sales"}) {
        CAPTURE(db_id);
        auto from_json = load_schema_from_tables_json(tables_path, db_id);
        auto from_sqlite = load_schema_from_sqlite(env().db(db_id));
        CHECK(structurally_equal(from_json, from_sqlite));
    }
    CHECK(load_schemas_from_tables_json(tables_path).size() == 4);
    CHECK_THROWS_AS(load_schema_from_tables_json(tables_path, "absent_db"), SchemaError);
}

TEST_CASE("structural equality is sensitive to content") {
    auto a = load_schema_from_sqlite(env().db("gymnast"));
    auto b = a;
    CHECK(structurally_equal(a, b));
    b.tables[0].columns[0].name = "renamed";
    CHECK_FALSE(structurally_equal(a, b));
    b = a;
    b.foreign_keys.clear();
    CHECK_FALSE(structurally_equal(a, b));
    b = a;
    b.tables[0].columns[0].declared_type = "text";
    CHECK_FALSE(structurally_equal(a, b));
    // case and type-synonym folding
    b = a;
    b.tables[0].name = "GYMNAST";
    b.tables[0].columns[0].declared_type = "INTEGER";
    CHECK(structurally_equal(a, b));
}

TEST_CASE("type normalization buckets") {
    CHECK(normalize_type("int") == "number");
    CHECK(normalize_type("INTEGER") == "number");
    CHECK(normalize_type("decimal(10,2)") == "number");
    CHECK(normalize_type("varchar(255)") == "text");
    CHECK(normalize_type("TEXT") == "text");
    CHECK(normalize_type("bool") == "boolean");
    CHECK(normalize_type("datetime") == "time");
    CHECK(normalize_type("blob") == "others");
}

TEST_CASE("text sequence linearization") {
    auto gymnast = load_schema_from_sqlite(env().db("gymnast"));
    CHECK(to_text_sequence(gymnast) ==
          "gymnast : gymnast_id, floor_exercise_points, pommel_horse_points, rings_points, "
          "vault_points, parallel_bars_points, horizontal_bar_points, total_points | people "
          ": people_id, name, age, height, hometown");

    DatabaseSchema single;
    single.db_id = "tiny";
    single.tables.push_back({"t", {{"a", "int"}}, {}});
    CHECK(to_text_sequence(single) == "t : a");
}

TEST_CASE("create sequence matches the committed golden blocks") {
    auto gymnast = load_schema_from_sqlite(env().db("gymnast"));
    std::string expected = testsup::read_file(testsup::fixture_dir() + "/goldens/listing2.txt");
    // the golden is a full demonstration; the schema block sits between the
    // header line and the first blank line
    std::string rendered = to_create_sequence(gymnast);
    CHECK(expected.find(rendered) != std::string::npos);

    DatabaseSchema bare;
    bare.db_id = "bare";
    bare.tables.push_back({"t", {{"a", "int"}, {"b", "text"}}, {}});
    CHECK(to_create_sequence(bare) ==
          "CREATE TABLE IF NOT EXISTS \"t\" (\n    \"a\" int,\n    \"b\" text\n);");
}

TEST_CASE("create sequence round-trips through sqlite for every fixture db") {
    for (const char* db_id : {"gymnast", "department_management", "cars", "sales"}) {
        CAPTURE(db_id);
        auto original = load_schema_from_sqlite(env().db(db_id));
        auto dir = testsup::temp_dir(std::string("roundtrip_") + db_id);
        std::string copy_path = (dir / "copy.sqlite").string();
        // one statement per CREATE block
        std::vector<std::string> statements;
        std::string ddl = to_create_sequence(original);
        size_t start = 0;
        while (start < ddl.size()) {
            size_t end = ddl.find(");\n", start);
            if (end == std::string::npos) {
                statements.push_back(ddl.substr(start));
                break;
            }
            statements.push_back(ddl.substr(start, end + 2 - start));
            start = end + 3;
        }
        testsup::exec_all(copy_path, statements);
        auto reloaded = load_schema_from_sqlite(copy_path);
        CHECK(structurally_equal(original, reloaded));
    }
}

TEST_CASE("ontology summary for the cars chain") {
    auto cars = load_schema_from_sqlite(env().db("cars"));
    auto summary = build_ontology_summary(cars);
    REQUIRE(summary.paths.size() == 1);
    CHECK(render_ontology_path(summary.paths[0]) ==
          "continents.contid -> countries.continent, countries.countryid -> "
          "car_makers.country, car_makers.id -> model_list.maker, model_list.model -> "
          "car_names.model, car_names.makeid -> cars_data.id");
    CHECK(summary.rendered ==
          "/* \nDatabase ontology:\n"
          "continents.contid -> countries.continent, countries.countryid -> "
          "car_makers.country, car_makers.id -> model_list.maker, model_list.model -> "
          "car_names.model, car_names.makeid -> cars_data.id\n*/");
    CHECK_FALSE(summary.truncated);
}

TEST_CASE("ontology of a star schema keeps three single-edge paths") {
    auto sales = load_schema_from_sqlite(env().db("sales"));
    auto summary = build_ontology_summary(sales);
    REQUIRE(summary.paths.size() == 3);
    for (const auto& path : summary.paths) CHECK(path.edges.size() == 1);
    // tie-break: lexicographic on the rendered line
    CHECK(render_ontology_path(summary.paths[0]) ==
          "dim_date.date_id -> fact_sales.date_id");
    CHECK(render_ontology_path(summary.paths[1]) ==
          "dim_product.product_id -> fact_sales.product_id");
    CHECK(render_ontology_path(summary.paths[2]) ==
          "dim_store.store_id -> fact_sales.store_id");
}

TEST_CASE("ontology without foreign keys is empty") {
    DatabaseSchema flat;
    flat.db_id = "flat";
    flat.tables.push_back({"a", {{"x", "int"}}, {}});
    flat.tables.push_back({"b", {{"y", "int"}}, {}});
    auto summary = build_ontology_summary(flat);
    CHECK(summary.paths.empty());
    CHECK(summary.rendered.empty());
}

TEST_CASE("ontology soundness and ordering over fixture databases") {
    for (const char* db_id : {"gymnast", "department_management", "cars", "sales"}) {
        CAPTURE(db_id);
        auto schema = load_schema_from_sqlite(env().db(db_id));
        auto summary = build_ontology_summary(schema);
        std::set<std::string> fk_edges;
        for (const auto& fk : schema.foreign_keys)
            fk_edges.insert(fk.from_table + "." + fk.from_column);
        std::set<std::string> seen;
        size_t previous_len = SIZE_MAX;
        for (const auto& path : summary.paths) {
            CHECK(path.edges.size() <= previous_len);
            previous_len = path.edges.size();
            for (const auto& edge : path.edges) {
                CHECK(fk_edges.count(edge.from_table + "." + edge.from_column) == 1);
                seen.insert(edge.from_table + "." + edge.from_column);
            }
        }
        CHECK(seen == fk_edges);  // every FK appears in at least one kept path
    }
}

TEST_CASE("subpath pruning can be disabled") {
    auto cars = load_schema_from_sqlite(env().db("cars"));
    OntologyOptions options;
    options.prune_subpaths = false;
    auto summary = build_ontology_summary(cars, options);
    // every contiguous subchain of the 5-edge chain: 5+4+3+2+1
    CHECK(summary.paths.size() == 15);
}

TEST_CASE("fixture descriptions load and cover the department schema") {
    auto dept = load_schema_from_sqlite(env().db("department_management"));
    dept.db_id = "department_management";
    auto descriptions = descriptions_from_json_file(
        testsup::fixture_dir() + "/descriptions.json", "department_management");
    CHECK(descriptions.provenance() == "fixture");
    CHECK(descriptions.size() == dept.column_count());
    REQUIRE(descriptions.find("department", "Department_ID") != nullptr);
    CHECK(*descriptions.find("department", "Department_ID") ==
          "a unique identifier for a department");
    // case-insensitive lookup
    CHECK(descriptions.find("DEPARTMENT", "department_id") != nullptr);
    CHECK(descriptions.find("department", "missing") == nullptr);
}

TEST_CASE("generated descriptions cover every column and cache correctly") {
    auto gymnast = load_schema_from_sqlite(env().db("gymnast"), 2);
    gymnast.db_id = "gymnast";

    llm::MockCompletionClient client;
    client.set_responder([](const llm::CompletionRequest& request) {
        // echo a deterministic marker derived from the prompt
        return "desc[" + std::to_string(request.prompt.size()) + "]";
    });

    auto dir = testsup::temp_dir("desccache");
    DescriptionCache cache((dir / "descriptions.json").string());

    auto first = generate_column_descriptions(gymnast, client, "mock-model", &cache);
    CHECK(first.size() == gymnast.column_count());
    size_t calls_after_first = client.call_count();
    CHECK(calls_after_first == gymnast.column_count());

    auto second = generate_column_descriptions(gymnast, client, "mock-model", &cache);
    CHECK(second.size() == gymnast.column_count());
    CHECK(client.call_count() == calls_after_first);  // all hits, zero client calls

    // a fresh cache object re-reads the file
    DescriptionCache reloaded((dir / "descriptions.json").string());
    CHECK(reloaded.find("gymnast", "gymnast", "Gymnast_ID") != nullptr);
}

TEST_CASE("description generation surfaces llm failures as LlmUnavailable") {
    auto gymnast = load_schema_from_sqlite(env().db("gymnast"));
    gymnast.db_id = "gymnast";
    llm::MockCompletionClient client;  // no responses configured
    CHECK_THROWS_AS(generate_column_descriptions(gymnast, client, "mock-model"),
                    LlmUnavailable);
}

TEST_CASE("malformed tables.json raises SchemaError") {
    auto dir = testsup::temp_dir("badjson");
    std::string path = (dir / "tables.json").string();
    testsup::write_file(path, "{not json");
    CHECK_THROWS_AS(load_schemas_from_tables_json(path), SchemaError);
    testsup::write_file(path, "{\"db_id\": \"x\"}");
    CHECK_THROWS_AS(load_schemas_from_tables_json(path), SchemaError);  // root not an array
    testsup::write_file(path, "[{\"db_id\": \"x\"}]");
    CHECK_THROWS_AS(load_schemas_from_tables_json(path), SchemaError);  // missing fields
}

TEST_CASE("long chains hit the path length cap and set truncated") {
    DatabaseSchema chain;
    chain.db_id = "chain";
    const int tables = 13;
    for (int t = 0; t < tables; ++t) {
        Table table;
        table.name = "t" + std::to_string(t);
        table.columns = {{"id", "int"}, {"ref", "int"}};
        table.primary_key = {"id"};
        chain.tables.push_back(std::move(table));
        if (t > 0)
            chain.foreign_keys.push_back(
                {"t" + std::to_string(t), "ref", "t" + std::to_string(t - 1), "id"});
    }
    auto summary = build_ontology_summary(chain);
    CHECK(summary.truncated);
    for (const auto& path : summary.paths) CHECK(path.edges.size() <= 10);
    // a self-referencing FK is excluded from path building
    DatabaseSchema selfref;
    selfref.db_id = "selfref";
    Table employee;
    employee.name = "employee";
    employee.columns = {{"id", "int"}, {"manager", "int"}};
    employee.primary_key = {"id"};
    selfref.tables.push_back(std::move(employee));
    selfref.foreign_keys.push_back({"employee", "manager", "employee", "id"});
    CHECK(build_ontology_summary(selfref).paths.empty());
}
