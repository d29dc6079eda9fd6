#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sptrsv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Lower-triangular sparse matrix in CSR form. Rows are canonical: off-diagonal
/// entries sorted by ascending column, diagonal entry last and non-zero.
struct CsrMatrix {
    std::int32_t n = 0;
    std::int32_t nnz = 0;
    std::vector<std::int32_t> rowptr;  // length n+1
    std::vector<std::int32_t> colidx;  // length nnz
    std::vector<float> value;          // length nnz

    float diag(std::int32_t row) const { return value[rowptr[row + 1] - 1]; }
};

struct Rhs {
    std::vector<float> b;
};

struct Triplet {
    std::int32_t row = 0;
    std::int32_t col = 0;
    float val = 0.0f;
};

/// Build a canonical CsrMatrix from unordered triplets. Duplicates are summed.
/// Throws on upper-triangular entries, missing/zero diagonals, or out-of-range
/// indices (0-based here; Matrix Market's 1-based indices are shifted by the
/// loader).
CsrMatrix matrix_from_triplets(std::int32_t n, std::vector<Triplet> entries);

/// Load a Matrix Market coordinate file (real, integer, or pattern; general or
/// symmetric). With lower_extract, keeps entries with row >= col and forces a
/// 1.0 diagonal where the source diagonal is absent or zero; pattern files are
/// valued diag 1.0 / off-diag -1.0. Without lower_extract the file must
/// already be a valid lower-triangular system.
CsrMatrix load_matrix_market(const std::string& path, bool lower_extract);

/// Plain-text RHS, one float per line; length must equal n.
Rhs load_rhs(const std::string& path, std::int32_t n);

Rhs ones_rhs(std::int32_t n);

/// Copy with each diagonal value replaced by its reciprocal.
CsrMatrix precompute_reciprocals(const CsrMatrix& m);

void write_matrix_market(const CsrMatrix& m, const std::string& path);

}  // namespace sptrsv
