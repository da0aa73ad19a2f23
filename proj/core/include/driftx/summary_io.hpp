#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "driftx/nystrom.hpp"

namespace driftx {

/// Summary-bank file layout (all integers and floats little-endian, 8 bytes):
///
///   "DXSM"  u8 version(=1)  u64 shard_count  f64 epsilon
///   per shard: u64 r, u64 D, f64 tau, f64 lambda, i64 class_id (-1 = none),
///              f64 W[r*r], f64 landmarks[r*D], f64 A_p[r*D], f64 b_p[r], u64 count
///
/// Matrices are stored row-major. Loading re-derives each basis id from the
/// stored parts, so a loaded bank is structurally equal to the saved one.
inline constexpr char kBankMagic[4] = {'D', 'X', 'S', 'M'};
inline constexpr std::uint8_t kBankVersion = 1;

std::vector<std::uint8_t> encode_summary_bank(const ShardedSummaryBank& bank);
/// Throws Error with MagicMismatch, VersionMismatch, Truncated or NonFinite.
ShardedSummaryBank decode_summary_bank(const std::vector<std::uint8_t>& bytes);

void save_summary_bank(const ShardedSummaryBank& bank, const std::filesystem::path& path);
ShardedSummaryBank load_summary_bank(const std::filesystem::path& path);

}  // namespace driftx
