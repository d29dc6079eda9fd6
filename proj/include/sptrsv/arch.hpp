#pragma once

#include <cstdint>

#include "sptrsv/matrix.hpp"

namespace sptrsv {

/// Machine parameters. cu_count is stored directly (worked examples use CU
/// counts that are not powers of two); sel_bits() derives the crossbar select
/// width from it. Defaults: 64 CUs, 64-word x_i files, 8-word psum files,
/// 128-word per-CU data-memory windows, 150 MHz.
struct ArchConfig {
    std::int32_t cu_count = 64;
    std::int32_t m_log2 = 6;  // x_i register-file words per CU = 2^M
    std::int32_t k_log2 = 3;  // psum register-file words per CU = 2^K
    std::int32_t t_log2 = 7;  // data-memory words per CU = 2^T
    double clock_hz = 150e6;
    bool ideal_mode = false;  // skip bank-conflict stalls (no Bnop injection)

    std::int32_t xi_words() const { return 1 << m_log2; }
    std::int32_t psum_words() const { return 1 << k_log2; }
    std::int32_t dm_words() const { return 1 << t_log2; }

    /// Width of in_sel/out_sel: enough bits to name any CU (minimum 1).
    std::int32_t sel_bits() const {
        std::int32_t bits = 1;
        while ((1 << bits) < cu_count) ++bits;
        return bits;
    }

    void validate() const {
        if (cu_count < 1) throw Error("cu_count must be >= 1");
        if (m_log2 < 1 || m_log2 > 20) throw Error("m_log2 out of range [1,20]");
        // psum_read_addr doubles as the feedback/zero selector when the read
        // enable is clear, so at least one address bit must exist.
        if (k_log2 < 1 || k_log2 > 20) throw Error("k_log2 out of range [1,20]");
        if (t_log2 < 0 || t_log2 > 26) throw Error("t_log2 out of range [0,26]");
        if (clock_hz <= 0) throw Error("clock_hz must be positive");
    }
};

/// Memory capacities of the modeled accelerator's instruction and stream
/// memories; exceeding them is reported as a warning, not an error.
constexpr std::int64_t kInstructionMemoryWords = 65536;
constexpr std::int64_t kStreamMemoryWords = 65536;

}  // namespace sptrsv
