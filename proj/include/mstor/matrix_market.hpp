// Matrix Market coordinate I/O (real, general or symmetric, 1-based indices).
#pragma once

#include <filesystem>
#include <iosfwd>

#include "mstor/sparse.hpp"

namespace mstor {

// Symmetric files store the lower triangle and are expanded on load.
// Malformed input raises ParseError naming the line; 0-based indices are rejected.
SparseMatrix read_matrix_market(std::istream& in, const std::string& source_name = "<stream>");
SparseMatrix read_matrix_market(const std::filesystem::path& path);

// Always writes coordinate real general with full precision.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a);

}  // namespace mstor
