#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mobility::cli {

/// Shortest decimal form of `value` with the given number of significant
/// digits ('.' separator, "nan"/"inf" spelled out).
std::string format_number(double value, int digits);

/// A numeric table with a mandatory header row. Rows are written with '\n'
/// line endings and cells at `digits` significant digits, so identical
/// inputs produce byte-identical files.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const Table& table,
               int digits);

/// Same table as a JSON array of objects (used when output.format = json).
void write_json_table(const std::filesystem::path& path, const Table& table);

} // namespace mobility::cli
