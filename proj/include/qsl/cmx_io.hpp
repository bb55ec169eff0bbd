#pragma once

// CMX1 binary matrix format: magic "CMX1", rows and cols as little-endian
// uint64, then rows*cols entries in column-major order, each stored as two
// little-endian IEEE-754 doubles (real, imaginary).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsl/linalg.hpp"

namespace qsl {

std::vector<unsigned char> encode_cmx(const ComplexMatrix& m);
ComplexMatrix decode_cmx(const std::vector<unsigned char>& bytes);

void write_cmx(std::ostream& os, const ComplexMatrix& m);
ComplexMatrix read_cmx(std::istream& is);

/// Atomic: writes to a temporary sibling and renames over the target.
void write_cmx(const std::filesystem::path& path, const ComplexMatrix& m);
ComplexMatrix read_cmx(const std::filesystem::path& path);

/// Writes bytes to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace qsl
