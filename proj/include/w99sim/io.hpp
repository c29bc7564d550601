#pragma once

#include <string>
#include <string_view>

namespace w99sim::io
{

/// Whole-file read. Throws ParseError naming the path when unreadable.
std::string read_file(const std::string & path);

/// Writes to a sibling temporary file and renames it over `path`, so the
/// target is either complete or untouched. Throws std::runtime_error.
void write_file_atomic(const std::string & path, std::string_view content);

}  // namespace w99sim::io
