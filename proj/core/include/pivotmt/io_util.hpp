#pragma once

#include <string>
#include <string_view>

namespace pivotmt::io {

/// Whole-file read; throws IoError if the file cannot be opened.
std::string read_file(const std::string& path);

/// Crash-safe write: writes to a sibling temp file, then renames over the
/// destination.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace pivotmt::io
