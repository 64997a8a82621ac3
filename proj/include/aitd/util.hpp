#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace aitd {

/// Whole-file read; throws DataError with the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes `<path>.tmp` then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Splits on '\n', dropping one trailing '\r' per line. A final empty segment
/// after a terminating newline is not returned.
std::vector<std::string_view> split_lines(std::string_view text);

bool is_blank(std::string_view text) noexcept;

/// Shortest decimal that round-trips the double.
std::string format_double(double value);

} // namespace aitd
