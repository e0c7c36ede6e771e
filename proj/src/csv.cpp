#include "bankdyn/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "bankdyn/error.hpp"

namespace bankdyn::csv {

namespace {

std::vector<std::string> split_record(std::string_view text, const std::string& source,
                                      std::size_t line) {
    std::vector<std::string> out;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char c = text[k];
        if (in_quotes) {
            if (c == '"') {
                if (k + 1 < text.size() && text[k + 1] == '"') {
                    field.push_back('"');
                    ++k;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            if (!field.empty() || was_quoted) throw ParseError(source, line, "stray quote");
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            if (was_quoted) throw ParseError(source, line, "text after closing quote");
            field.push_back(c);
        }
    }
    if (in_quotes) throw ParseError(source, line, "unterminated quote");
    out.push_back(std::move(field));
    return out;
}

}  // namespace

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

std::optional<Row> Reader::next() {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (line_ == 1 && text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
        if (text.find_first_not_of(" \t") == std::string::npos) continue;
        return Row{line_, split_record(text, source_, line_)};
    }
    return std::nullopt;
}

void Reader::expect_header(const std::vector<std::string_view>& expected) {
    auto row = next();
    if (!row) throw ParseError(source_, line_ + 1, "missing header");
    bool ok = row->fields.size() == expected.size();
    for (std::size_t k = 0; ok && k < expected.size(); ++k) ok = row->fields[k] == expected[k];
    if (!ok) {
        std::string want;
        for (std::size_t k = 0; k < expected.size(); ++k) {
            if (k) want += ',';
            want += expected[k];
        }
        throw ParseError(source_, row->line, "expected header '" + want + "'");
    }
}

double parse_double(std::string_view field, const std::string& source, std::size_t line) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ParseError(source, line, "invalid number '" + std::string(field) + "'");
    }
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace bankdyn::csv
