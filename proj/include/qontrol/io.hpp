// io.hpp — deterministic text serialization: CSV rows, run manifests, and
// atomic file writes (write-to-temp, rename-on-success).

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qontrol::io {

// Shortest round-trip decimal form (locale-independent, LF-newline files).
std::string format_double(double value);

// Joins formatted fields with commas.
std::string csv_row(const std::vector<std::string>& fields);

// Writes content to path via a sibling temp file and rename; removes the temp
// file and throws std::ios_base::failure on any I/O error.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// Flat key=value manifest block, one pair per line, in the given order.
std::string manifest_text(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace qontrol::io
