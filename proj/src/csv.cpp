#include "tpanon/csv.hpp"

#include <charconv>

#include "tpanon/error.hpp"

namespace tpanon::csv {

Reader::Reader(const std::filesystem::path& path, std::vector<std::string_view> expected_header)
    : in_(path), path_(path.string()), columns_(expected_header.size()) {
    if (!in_) {
        throw Error("cannot open " + path_);
    }
    std::vector<std::string> header;
    if (!next(header)) {
        throw Error(path_ + ": empty file, expected header");
    }
    bool ok = header.size() == expected_header.size();
    for (std::size_t i = 0; ok && i < header.size(); ++i) {
        ok = header[i] == expected_header[i];
    }
    if (!ok) {
        std::string want;
        for (auto h : expected_header) {
            if (!want.empty()) want += ',';
            want += h;
        }
        fail("malformed header, expected '" + want + "'");
    }
}

bool Reader::next(std::vector<std::string>& fields) {
    while (std::getline(in_, buf_)) {
        ++line_;
        if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
        if (buf_.empty()) continue;
        split(buf_, fields);
        if (line_ > 1 && fields.size() != columns_) {
            fail("malformed row: expected " + std::to_string(columns_) + " fields, got " +
                 std::to_string(fields.size()));
        }
        return true;
    }
    return false;
}

void Reader::fail(const std::string& message) const {
    throw Error(path_ + ":" + std::to_string(line_) + ": " + message);
}

void split(std::string_view line, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    std::size_t i = 0;
    while (true) {
        field.clear();
        if (i < line.size() && line[i] == '"') {
            ++i;
            while (i < line.size()) {
                if (line[i] == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field += '"';
                        i += 2;
                    } else {
                        ++i;
                        break;
                    }
                } else {
                    field += line[i++];
                }
            }
            // anything between the closing quote and the separator is kept verbatim
            while (i < line.size() && line[i] != ',') field += line[i++];
        } else {
            auto end = line.find(',', i);
            if (end == std::string_view::npos) end = line.size();
            field.assign(line.substr(i, end - i));
            i = end;
        }
        out.push_back(field);
        if (i >= line.size()) break;
        ++i;  // skip ','
    }
}

void append_field(std::string& out, std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        out += field;
        return;
    }
    out += '"';
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

std::int64_t parse_int(std::string_view s, const Reader& where, std::string_view column) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        where.fail("malformed row: " + std::string(column) + " '" + std::string(s) +
                   "' is not an integer");
    }
    return v;
}

}  // namespace tpanon::csv
