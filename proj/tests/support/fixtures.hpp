#pragma once

#include <filesystem>
#include <string>
#include <vector>

// Shared fixture machinery for unit and acceptance tests: builds the four
// sample databases (gymnast, department_management, cars, sales) in a Spider
// directory layout and locates the committed JSON fixtures.

namespace t2s::testsup {

// tests/fixtures, injected by the build
std::string fixture_dir();

// fresh directory under the system temp root, removed lazily by the OS
std::filesystem::path temp_dir(const std::string& tag);

void exec_all(const std::string& db_path, const std::vector<std::string>& statements);

const std::vector<std::string>& gymnast_statements();
const std::vector<std::string>& department_statements();
const std::vector<std::string>& cars_statements();
const std::vector<std::string>& sales_statements();

// creates <dir>/<db_id>/<db_id>.sqlite and returns its path
std::string build_database(const std::filesystem::path& dir, const std::string& db_id);

// database/<db_id>/<db_id>.sqlite for all four fixture databases
std::filesystem::path build_spider_layout(const std::string& tag);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace t2s::testsup
