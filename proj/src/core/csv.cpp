#include "odmforge/core/csv.hpp"

#include <istream>
#include <ostream>

#include "odmforge/core/error.hpp"

namespace odmforge::core {

bool parse_csv_record(std::string_view line, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    size_t i = 0;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    while (i < line.size()) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
        ++i;
    }
    if (quoted) return false; // record continues on the next line
    fields.push_back(std::move(field));
    return true;
}

CsvReader::CsvReader(std::istream& in, std::string source_name)
    : in_(in), source_(std::move(source_name)) {
    std::string line;
    if (!std::getline(in_, line))
        fail(Errc::malformed_row, source_ + ": missing header row");
    ++line_;
    if (!parse_csv_record(line, header_))
        fail(Errc::malformed_row, source_ + ": unterminated quote in header");
}

int CsvReader::column(std::string_view name) const {
    for (size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return static_cast<int>(i);
    return -1;
}

bool CsvReader::next(std::vector<std::string>& fields) {
    if (!std::getline(in_, buf_)) return false;
    ++line_;
    while (!parse_csv_record(buf_, fields)) {
        std::string more;
        if (!std::getline(in_, more))
            fail(Errc::malformed_row,
                 source_ + ":" + std::to_string(line_) + ": unterminated quoted field");
        buf_.push_back('\n');
        buf_.append(more);
        ++line_;
    }
    return true;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out.put('"');
            for (char c : f) {
                if (c == '"') out.put('"');
                out.put(c);
            }
            out.put('"');
        } else {
            out << f;
        }
    }
    out.put('\n');
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot write " + path.string());
    return out;
}

} // namespace odmforge::core
