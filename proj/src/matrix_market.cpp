#include "mstor/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mstor {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void fail(const std::string& source, long line, const std::string& msg) {
    throw ParseError(source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in, const std::string& source_name) {
    std::string line;
    long lineno = 0;

    if (!std::getline(in, line)) fail(source_name, 1, "empty file");
    ++lineno;
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (lower(banner) != "%%matrixmarket")
        fail(source_name, lineno, "missing %%MatrixMarket banner");
    if (lower(object) != "matrix" || lower(format) != "coordinate")
        fail(source_name, lineno, "only coordinate matrices are supported");
    if (lower(field) != "real")
        fail(source_name, lineno, "only real entries are supported, got '" + field + "'");
    const std::string sym = lower(symmetry);
    if (sym != "general" && sym != "symmetric")
        fail(source_name, lineno, "only general or symmetric storage is supported, got '" +
                                  symmetry + "'");
    const bool symmetric = sym == "symmetric";

    index_t rows = 0, cols = 0, declared = 0;
    bool have_sizes = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        std::istringstream sizes(line);
        if (!(sizes >> rows >> cols >> declared))
            fail(source_name, lineno, "expected 'rows cols nnz' size line");
        std::string extra;
        if (sizes >> extra) fail(source_name, lineno, "trailing tokens on size line");
        have_sizes = true;
        break;
    }
    if (!have_sizes) fail(source_name, lineno, "missing size line");
    if (rows < 0 || cols < 0 || declared < 0)
        fail(source_name, lineno, "negative size");
    if (symmetric && rows != cols)
        fail(source_name, lineno, "symmetric matrices must be square");

    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(symmetric ? 2 * declared : declared));
    index_t seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream entry(line);
        index_t i = 0, j = 0;
        double v = 0.0;
        if (!(entry >> i >> j >> v))
            fail(source_name, lineno, "expected 'row col value'");
        if (i == 0 || j == 0)
            fail(source_name, lineno, "indices are 1-based; found a 0");
        if (i < 0 || j < 0 || i > rows || j > cols)
            fail(source_name, lineno, "index out of range");
        if (!std::isfinite(v))
            fail(source_name, lineno, "non-finite value");
        if (symmetric && j > i)
            fail(source_name, lineno,
                 "symmetric files store the lower triangle; found an upper entry");
        ++seen;
        trips.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) trips.push_back({j - 1, i - 1, v});
    }
    if (seen != declared)
        fail(source_name, lineno,
             "declared " + std::to_string(declared) + " entries, found " + std::to_string(seen));
    return SparseMatrix::from_triplets(rows, cols, std::move(trips));
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return read_matrix_market(in, path.string());
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
    char buf[96];
    for (index_t i = 0; i < a.rows(); ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_vals(i);
        for (size_t k = 0; k < cols.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%" PRId64 " %" PRId64 " %.17g",
                          static_cast<std::int64_t>(i + 1),
                          static_cast<std::int64_t>(cols[k] + 1), vals[k]);
            out << buf << "\n";
        }
    }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_matrix_market(out, a);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace mstor
