#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sledge {

// RFC 4180 reader: comma separated, double-quoted fields with "" escapes,
// quoted fields may span lines, CRLF or LF line endings.
// Throws FormatError on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace sledge
