#ifndef SLTERR_TEXT_IO_H_
#define SLTERR_TEXT_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace slterr {

using Tokens = std::vector<std::string>;

// Splits on ASCII whitespace only; never re-tokenizes.
Tokens SplitTokens(std::string_view line);
std::string JoinTokens(const Tokens& tokens, std::string_view sep = " ");

bool IsValidUtf8(std::string_view s);

// Reads a UTF-8 text file as LF-separated lines. A trailing newline does not
// produce an extra empty line. Throws on missing file or invalid UTF-8.
std::vector<std::string> ReadLines(const std::filesystem::path& path);

// Writes through a sibling temp file and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

std::string ReadFile(const std::filesystem::path& path);

// Fixed-point decimal with the given number of fractional digits.
std::string FormatFixed(double value, int digits);
// Shortest text that round-trips a double (17 significant digits).
std::string FormatExact(double value);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string CsvField(std::string_view field);
std::vector<std::string> SplitCsvLine(std::string_view line);

}  // namespace slterr

#endif  // SLTERR_TEXT_IO_H_
