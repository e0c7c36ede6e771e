#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bankdyn::csv {

/// One parsed record with its 1-based source line.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Minimal RFC-4180-ish reader: comma separated, optional double quotes,
/// CRLF tolerated, blank lines skipped. Quoted fields may not span lines.
class Reader {
public:
    Reader(std::istream& in, std::string source);

    /// Reads the header row and checks it matches `expected` exactly.
    void expect_header(const std::vector<std::string_view>& expected);
    [[nodiscard]] std::optional<Row> next();
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_ = 0;
};

/// Strict decimal parse of the whole field; throws ParseError on failure.
[[nodiscard]] double parse_double(std::string_view field, const std::string& source,
                                  std::size_t line);

/// Shortest representation that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

/// Quotes the field if it contains a comma, quote or newline.
[[nodiscard]] std::string escape(std::string_view field);

}  // namespace bankdyn::csv
