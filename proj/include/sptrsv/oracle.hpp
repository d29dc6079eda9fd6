#pragma once

#include "sptrsv/matrix.hpp"

namespace sptrsv {

struct Solution {
    std::vector<float> x;
};

/// Serial CSR forward substitution in 32-bit floats, rows ascending,
/// accumulation in row-major CSR order. Expects original (non-reciprocal)
/// diagonal values.
Solution solve_serial(const CsrMatrix& m, const Rhs& b);

/// Independent oracle: densify and run textbook forward substitution in
/// 64-bit floats, rounding the result to 32-bit. Limited to n <= 4096.
Solution solve_dense_bruteforce(const CsrMatrix& m, const Rhs& b);

/// Guarded relative error used by all 32-bit comparisons:
/// max_i |a_i - b_i| / max(1, |a_i|, |b_i|).
double max_rel_error(const std::vector<float>& a, const std::vector<float>& b);

}  // namespace sptrsv
