#include "fixtures.hpp"

#include <sqlite3.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef T2S_FIXTURE_DIR
#define T2S_FIXTURE_DIR "tests/fixtures"
#endif

namespace t2s::testsup {

namespace fs = std::filesystem;

std::string fixture_dir() { return T2S_FIXTURE_DIR; }

fs::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    fs::path dir = fs::temp_directory_path() /
                   ("t2s_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    fs::create_directories(dir);
    return dir;
}

void exec_all(const std::string& db_path, const std::vector<std::string>& statements) {
    sqlite3* db = nullptr;
    if (sqlite3_open(db_path.c_str(), &db) != SQLITE_OK)
        throw std::runtime_error("cannot create " + db_path);
    for (const auto& stmt : statements) {
        char* err = nullptr;
        if (sqlite3_exec(db, stmt.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown error";
            sqlite3_free(err);
            sqlite3_close(db);
            throw std::runtime_error("fixture statement failed: " + msg + "\n  in: " + stmt);
        }
    }
    sqlite3_close(db);
}

const std::vector<std::string>& gymnast_statements() {
    static const std::vector<std::string> stmts = {
        R"(CREATE TABLE IF NOT EXISTS "gymnast" (
    "Gymnast_ID" int,
    "Floor_Exercise_Points" real,
    "Pommel_Horse_Points" real,
    "Rings_Points" real,
    "Vault_Points" real,
    "Parallel_Bars_Points" real,
    "Horizontal_Bar_Points" real,
    "Total_Points" real,
    PRIMARY KEY ("Gymnast_ID"),
    FOREIGN KEY ("Gymnast_ID") REFERENCES "people"("People_ID")
);)",
        R"(CREATE TABLE IF NOT EXISTS "people" (
    "People_ID" int,
    "Name" text,
    "Age" real,
    "Height" real,
    "Hometown" text,
    PRIMARY KEY ("People_ID")
);)",
        "INSERT INTO people VALUES (1, 'Paul Hamm', 24.0, 1.71, 'Waukesha');",
        "INSERT INTO people VALUES (2, 'Chen Yibing', 25.0, 1.6, 'Beijing');",
        "INSERT INTO people VALUES (3, 'Kohei Uchimura', 21.0, 1.61, 'Kitakyushu');",
        "INSERT INTO people VALUES (4, 'Marian Dragulescu', 28.0, 1.69, 'Bucharest');",
        "INSERT INTO people VALUES (5, 'Jordan Jovtchev', 35.0, 1.55, 'Sofia');",
        "INSERT INTO gymnast VALUES (1, 9.7, 9.6, 9.5, 9.4, 9.3, 9.2, 56.7);",
        "INSERT INTO gymnast VALUES (2, 9.5, 9.8, 9.7, 9.3, 9.6, 9.1, 57.0);",
        "INSERT INTO gymnast VALUES (3, 9.9, 9.7, 9.8, 9.6, 9.7, 9.5, 58.2);",
        "INSERT INTO gymnast VALUES (4, 9.2, 9.1, 9.3, 9.9, 9.0, 9.4, 55.9);",
        "INSERT INTO gymnast VALUES (5, 9.0, 9.2, 9.6, 9.1, 9.2, 9.3, 55.4);",
    };
    return stmts;
}

const std::vector<std::string>& department_statements() {
    static const std::vector<std::string> stmts = {
        R"(CREATE TABLE IF NOT EXISTS "department" (
    "Department_ID" int,
    "Name" text,
    "Creation" text,
    "Ranking" int,
    "Budget_in_Billions" real,
    "Num_Employees" real,
    PRIMARY KEY ("Department_ID")
);)",
        R"(CREATE TABLE IF NOT EXISTS "head" (
    "head_ID" int,
    "name" text,
    "born_state" text,
    "age" real,
    PRIMARY KEY ("head_ID")
);)",
        R"(CREATE TABLE IF NOT EXISTS "management" (
    "department_ID" int,
    "head_ID" int,
    "temporary_acting" text,
    PRIMARY KEY ("department_ID", "head_ID"),
    FOREIGN KEY ("department_ID") REFERENCES "department"("Department_ID"),
    FOREIGN KEY ("head_ID") REFERENCES "head"("head_ID")
);)",
        "INSERT INTO department VALUES (1, 'State', '1789', 1, 9.96, 30266.0);",
        "INSERT INTO department VALUES (2, 'Treasury', '1789', 2, 11.1, 115897.0);",
        "INSERT INTO department VALUES (3, 'Defense', '1947', 3, 439.3, 3000000.0);",
        "INSERT INTO department VALUES (4, 'Justice', '1870', 4, 23.4, 112557.0);",
        "INSERT INTO head VALUES (1, 'K. Smith', 'Alabama', 67.0);",
        "INSERT INTO head VALUES (2, 'L. Vance', 'California', 52.0);",
        "INSERT INTO head VALUES (3, 'M. Reed', 'Alabama', 58.0);",
        "INSERT INTO management VALUES (1, 1, 'Yes');",
        "INSERT INTO management VALUES (2, 2, 'No');",
        "INSERT INTO management VALUES (3, 3, 'Yes');",
    };
    return stmts;
}

const std::vector<std::string>& cars_statements() {
    static const std::vector<std::string> stmts = {
        R"(CREATE TABLE IF NOT EXISTS "continents" (
    "ContId" INTEGER,
    "Continent" TEXT,
    PRIMARY KEY ("ContId")
);)",
        R"(CREATE TABLE IF NOT EXISTS "countries" (
    "CountryId" INTEGER,
    "CountryName" TEXT,
    "Continent" INTEGER,
    PRIMARY KEY ("CountryId"),
    FOREIGN KEY ("Continent") REFERENCES "continents"("ContId")
);)",
        R"(CREATE TABLE IF NOT EXISTS "car_makers" (
    "Id" INTEGER,
    "Maker" TEXT,
    "FullName" TEXT,
    "Country" TEXT,
    PRIMARY KEY ("Id"),
    FOREIGN KEY ("Country") REFERENCES "countries"("CountryId")
);)",
        R"(CREATE TABLE IF NOT EXISTS "model_list" (
    "ModelId" INTEGER,
    "Maker" INTEGER,
    "Model" TEXT,
    PRIMARY KEY ("ModelId"),
    FOREIGN KEY ("Maker") REFERENCES "car_makers"("Id")
);)",
        R"(CREATE TABLE IF NOT EXISTS "car_names" (
    "MakeId" INTEGER,
    "Model" TEXT,
    "Make" TEXT,
    PRIMARY KEY ("MakeId"),
    FOREIGN KEY ("Model") REFERENCES "model_list"("Model")
);)",
        R"(CREATE TABLE IF NOT EXISTS "cars_data" (
    "Id" INTEGER,
    "MPG" TEXT,
    "Cylinders" INTEGER,
    "Edispl" REAL,
    "Horsepower" TEXT,
    "Weight" INTEGER,
    "Accelerate" REAL,
    "Year" INTEGER,
    PRIMARY KEY ("Id"),
    FOREIGN KEY ("Id") REFERENCES "car_names"("MakeId")
);)",
        "INSERT INTO continents VALUES (1, 'america');",
        "INSERT INTO continents VALUES (2, 'europe');",
        "INSERT INTO continents VALUES (3, 'asia');",
        "INSERT INTO continents VALUES (4, 'africa');",
        "INSERT INTO continents VALUES (5, 'australia');",
        "INSERT INTO countries VALUES (1, 'usa', 1);",
        "INSERT INTO countries VALUES (2, 'germany', 2);",
        "INSERT INTO countries VALUES (3, 'france', 2);",
        "INSERT INTO countries VALUES (4, 'japan', 3);",
        "INSERT INTO car_makers VALUES (1, 'amc', 'American Motor Company', '1');",
        "INSERT INTO car_makers VALUES (2, 'volkswagen', 'Volkswagen', '2');",
        "INSERT INTO car_makers VALUES (3, 'bmw', 'BMW', '2');",
        "INSERT INTO car_makers VALUES (4, 'ford', 'Ford Motor Company', '1');",
        "INSERT INTO model_list VALUES (1, 1, 'gremlin');",
        "INSERT INTO model_list VALUES (2, 2, 'golf');",
        "INSERT INTO model_list VALUES (3, 3, 'x5');",
        "INSERT INTO model_list VALUES (4, 4, 'fiesta');",
        "INSERT INTO car_names VALUES (1, 'gremlin', 'amc gremlin');",
        "INSERT INTO car_names VALUES (2, 'golf', 'vw golf');",
        "INSERT INTO car_names VALUES (3, 'x5', 'bmw x5');",
        "INSERT INTO car_names VALUES (4, 'fiesta', 'ford fiesta');",
        "INSERT INTO cars_data VALUES (1, '18', 6, 250.0, '110', 3139, 14.5, 1970);",
        "INSERT INTO cars_data VALUES (2, '24', 4, 97.0, '52', 2130, 24.6, 1972);",
        "INSERT INTO cars_data VALUES (3, '26', 4, 121.0, '113', 2234, 12.5, 1975);",
        "INSERT INTO cars_data VALUES (4, '33', 4, 91.0, '53', 1795, 17.4, 1976);",
    };
    return stmts;
}

const std::vector<std::string>& sales_statements() {
    static const std::vector<std::string> stmts = {
        R"(CREATE TABLE IF NOT EXISTS "dim_product" (
    "product_id" int,
    "name" text,
    "price" real,
    "category" text,
    PRIMARY KEY ("product_id")
);)",
        R"(CREATE TABLE IF NOT EXISTS "dim_store" (
    "store_id" int,
    "city" text,
    "region" text,
    PRIMARY KEY ("store_id")
);)",
        R"(CREATE TABLE IF NOT EXISTS "dim_date" (
    "date_id" int,
    "year" int,
    "month" int,
    PRIMARY KEY ("date_id")
);)",
        R"(CREATE TABLE IF NOT EXISTS "fact_sales" (
    "sale_id" int,
    "product_id" int,
    "store_id" int,
    "date_id" int,
    "amount" real,
    "quantity" int,
    PRIMARY KEY ("sale_id"),
    FOREIGN KEY ("product_id") REFERENCES "dim_product"("product_id"),
    FOREIGN KEY ("store_id") REFERENCES "dim_store"("store_id"),
    FOREIGN KEY ("date_id") REFERENCES "dim_date"("date_id")
);)",
        "INSERT INTO dim_product VALUES (1, 'kite', 10.5, 'toys');",
        "INSERT INTO dim_product VALUES (2, 'ball', 5.0, 'toys');",
        "INSERT INTO dim_product VALUES (3, 'lamp', 20.0, 'home');",
        "INSERT INTO dim_store VALUES (1, 'Boston', 'east');",
        "INSERT INTO dim_store VALUES (2, 'Austin', 'south');",
        "INSERT INTO dim_date VALUES (1, 2019, 5);",
        "INSERT INTO dim_date VALUES (2, 2020, 6);",
        "INSERT INTO dim_date VALUES (3, 2021, 7);",
        "INSERT INTO fact_sales VALUES (1, 1, 1, 1, 21.0, 2);",
        "INSERT INTO fact_sales VALUES (2, 2, 1, 2, 5.0, 1);",
        "INSERT INTO fact_sales VALUES (3, 3, 2, 2, 40.0, 2);",
        "INSERT INTO fact_sales VALUES (4, 1, 2, 3, 10.5, 1);",
        "INSERT INTO fact_sales VALUES (5, 2, 2, 3, 15.0, 3);",
    };
    return stmts;
}

std::string build_database(const fs::path& dir, const std::string& db_id) {
    fs::create_directories(dir / db_id);
    std::string path = (dir / db_id / (db_id + ".sqlite")).string();
    if (fs::exists(path)) return path;
    if (db_id == "gymnast") exec_all(path, gymnast_statements());
    else if (db_id == "department_management") exec_all(path, department_statements());
    else if (db_id == "cars") exec_all(path, cars_statements());
    else if (db_id == "sales") exec_all(path, sales_statements());
    else throw std::runtime_error("unknown fixture database: " + db_id);
    return path;
}

fs::path build_spider_layout(const std::string& tag) {
    fs::path root = temp_dir(tag);
    fs::path dbdir = root / "database";
    for (const char* db_id : {"gymnast", "department_management", "cars", "sales"})
        build_database(dbdir, db_id);
    return root;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace t2s::testsup
