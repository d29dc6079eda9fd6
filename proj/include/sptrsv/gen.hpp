#pragma once

#include <cstdint>

#include "sptrsv/matrix.hpp"

namespace sptrsv {

/// Deterministic synthetic lower-triangular systems for tests and the CLI
/// `gen` command. Value convention for the structural kinds: diagonal 1.0,
/// off-diagonal -1.0.

/// Bidiagonal chain: row i depends on row i-1.
CsrMatrix gen_chain(std::int32_t n);

/// k independent rows plus one sink row depending on all of them (n = k+1).
CsrMatrix gen_fanin(std::int32_t k);

/// Diagonal-only matrix (no dependencies).
CsrMatrix gen_diagonal(std::int32_t n);

/// Banded matrix: row i depends on rows i-1 .. i-band (clamped at 0). Fixed
/// max indegree = band; used by the compile-time scaling family.
CsrMatrix gen_banded(std::int32_t n, std::int32_t band);

/// Seeded random lower-triangular system. Each entry (i,j), j<i, is present
/// with probability `density`; off-diagonal values are uniform in [-1,1] and
/// the diagonal is 1 + sum|off-diagonals| (strictly diagonally dominant, so
/// any accumulation order agrees to tight tolerances in 32-bit floats).
CsrMatrix gen_random_lower(std::int32_t n, double density, std::uint64_t seed);

}  // namespace sptrsv
