#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace odmforge::core {

/// Splits one CSV record into fields. Handles RFC 4180 quoting and a
/// trailing CR. Returns false when a quoted field is left open (caller
/// should append the next physical line and retry).
bool parse_csv_record(std::string_view line, std::vector<std::string>& fields);

/// Streaming CSV reader with a mandatory header row.
class CsvReader {
  public:
    CsvReader(std::istream& in, std::string source_name);

    const std::vector<std::string>& header() const { return header_; }

    /// Column index by exact name; -1 when absent.
    int column(std::string_view name) const;

    /// Reads the next record into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number of the record most recently returned.
    std::size_t line_number() const { return line_; }

    const std::string& source() const { return source_; }

  private:
    std::istream& in_;
    std::string source_;
    std::vector<std::string> header_;
    std::string buf_;
    std::size_t line_ = 0;
};

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Opens a file for reading, failing with IoError when missing.
std::ifstream open_input(const std::filesystem::path& path);

/// Opens a file for writing, creating parent directories.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace odmforge::core
