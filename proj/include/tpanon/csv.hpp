#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace tpanon::csv {

// Minimal RFC 4180 reader: comma separated, optional double-quoted fields
// with "" escapes. Embedded newlines inside quotes are not supported.
class Reader {
public:
    Reader(const std::filesystem::path& path, std::vector<std::string_view> expected_header);

    // Returns false at end of file. Blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    // 1-based line number of the row returned by the last next().
    std::size_t line() const { return line_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& message) const;

private:
    std::ifstream in_;
    std::string path_;
    std::string buf_;
    std::size_t line_ = 0;
    std::size_t columns_ = 0;
};

void split(std::string_view line, std::vector<std::string>& out);

// Appends `field` to `out`, quoting when needed.
void append_field(std::string& out, std::string_view field);

std::int64_t parse_int(std::string_view s, const Reader& where, std::string_view column);

}  // namespace tpanon::csv
