#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace owc::detail {

/// printf("%.*g") of a double.
std::string format_g(double value, int digits);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws IoError naming `source` when absent.
    std::size_t column(std::string_view name, const std::string& source) const;
};

/// Reads a plain comma-separated file (no quoting). Throws IoError naming the
/// file when it cannot be read or a row has the wrong number of fields.
CsvTable read_csv(const std::filesystem::path& path);

/// Parses a full-string double; throws IoError mentioning `context`.
double parse_field(std::string_view text, const std::string& context);

/// Writes `data` to `path` in binary mode; throws IoError naming the file.
void write_file(const std::filesystem::path& path, std::string_view data);

/// Reads a whole file; throws IoError naming the file.
std::string read_file(const std::filesystem::path& path);

}  // namespace owc::detail
