#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sptrsv/arch.hpp"
#include "sptrsv/schedule.hpp"

namespace sptrsv {

/// PE control values carried in a slice.
constexpr std::uint32_t kPeIdle = 0;   // no operation this cycle
constexpr std::uint32_t kPeSolve = 1;  // finish a row: x = (b - psum) * [1/diag]
constexpr std::uint32_t kPeEdge = 2;   // accumulate one term: psum + L * x

/// One compute unit's slice of a VLIW instruction word. Field widths at the
/// default configuration are noted; K/M/T/N widths follow ArchConfig.
struct CuInstruction {
    bool psum_read_en = false;   // read+release a parked partial sum
    bool psum_write_en = false;  // park the feedback register's sum
    std::uint32_t psum_read_addr = 0;  // K bits; with psum_read_en clear the
                                       // MSB picks the PE's partial-sum input:
                                       // 1 = feedback register, 0 = zero
    bool xi_read_en = false;     // drive this bank's solution-file readout
    bool xi_write_en = false;    // store into this bank's solution file
    std::uint32_t xi_read_addr = 0;  // M bits
    bool xi_release = false;     // readout also frees the slot
    bool dm_read_en = false;     // fetch a value from this unit's data memory
    bool dm_write_en = false;    // append the PE result to this unit's data memory
    std::uint32_t dm_read_addr = 0;  // T bits
    bool in_valid = false;       // consume a solution value this cycle
    std::uint32_t in_sel = 0;    // N bits: bank whose export feeds the PE
    bool out_valid = false;      // drive this unit's output-crossbar lane
    std::uint32_t out_sel = 0;   // N bits: destination bank of the lane
    std::uint32_t s34 = 0;       // bit0: solution-file write source
                                 //       0 = output crossbar, 1 = own data memory
                                 // bit1: data-memory write source
                                 //       0 = PE result, 1 = solution-file readout
    std::uint32_t pe_ctl = kPeIdle;  // 2 bits

    bool operator==(const CuInstruction&) const = default;
};

/// Bits in one CU slice: six 1-bit enables, K+M+T address bits, two
/// valid+select pairs, the release bit, s34 and pe_ctl (41 at defaults).
std::int32_t slice_bits(const ArchConfig& cfg);

/// Bytes holding one full VLIW word of cu_count slices (328 at defaults).
std::int32_t word_bytes(const ArchConfig& cfg);

/// Pack `s` into the slice position of unit `cu` inside `word` (a buffer of
/// word_bytes). Bits are laid out MSB-first in declaration order, slices in
/// ascending unit order from the front. Throws on field overflow.
void encode_slice(const CuInstruction& s, const ArchConfig& cfg, std::int32_t cu,
                  std::uint8_t* word);

/// Inverse of encode_slice.
CuInstruction decode_slice(const ArchConfig& cfg, std::int32_t cu,
                           const std::uint8_t* word);

/// Run-length tag stream for one unit: kinds 0..3 are the NopTag values of
/// idle slices, kind 4 marks executing slices.
struct TagRun {
    std::uint8_t kind = 0;
    std::int64_t count = 0;
    bool operator==(const TagRun&) const = default;
};
constexpr std::uint8_t kTagExecute = 4;

/// A complete machine program: instruction words plus the per-unit data
/// streams, the data-memory output permutation, and the idle-tag sidecar.
struct Program {
    ArchConfig arch;
    std::int64_t total_cycles = 0;
    std::int32_t n = 0;      // rows of the solved system
    std::int64_t nnz = 0;    // stored entries incl. diagonal
    std::string matrix_name;
    std::vector<std::uint8_t> words;            // total_cycles * word_bytes
    std::vector<std::vector<float>> l_streams;  // per unit: one word per execute
    std::vector<std::vector<float>> b_streams;  // per unit: one word per row solve
    std::vector<std::int32_t> out_perm;         // data-memory write order (unit-major) -> row
    std::vector<std::vector<TagRun>> tag_runs;  // per unit, tiling total_cycles
};

/// Static consistency report from walking a program's instruction words.
struct ProgramCheck {
    std::int64_t imem_words = 0;           // = total_cycles
    std::int64_t max_stream_words = 0;     // longest per-unit l/b stream
    std::vector<std::string> warnings;     // on-chip capacity overflows
};

/// Decode every slice and verify the program against its own metadata:
/// stream lengths match the per-unit execute counts, the sidecar tiles the
/// timeline and marks exactly the idle slices, out_perm is a bijection onto
/// [0, n), and reserved pe_ctl values are absent. Throws Error on violation;
/// capacity overflows are returned as warnings.
ProgramCheck validate_program(const Program& p);

/// Bit-exact little-endian container ("SPTV1"). read_program throws on bad
/// magic or truncation.
void write_program(const Program& p, const std::string& path);
Program read_program(const std::string& path);

}  // namespace sptrsv
