#pragma once

#include <filesystem>

#include "lcm/types.hpp"

// On-disk formats.
//
// Feature matrix (binary, extension-agnostic, magic-sniffed):
//   bytes 0..3   magic "FMX1"
//   bytes 4..11  n_rows, unsigned 64-bit little-endian (>= 1)
//   bytes 12..19 n_cols, unsigned 64-bit little-endian (>= 1)
//   then n_rows * n_cols IEEE-754 doubles, little-endian, row-major.
// All values must be finite. Writes are byte-deterministic.
//
// Feature matrix (CSV): no header, one row per line, comma-separated decimal
// numbers, no locale dependence. Every row must have the same width.
//
// Model file (JSON): object with exactly the members
//   {"version": 1, "dim": C, "eps": e, "mu": [...], "u": [...],
//    "w": [...], "a": [...]}
// with all four arrays of length dim, all values finite, eps > 0. Numbers
// are written with shortest round-trip precision and keys in fixed order, so
// write -> read -> write is byte-identical.

namespace lcm {

[[nodiscard]] FeatureBatch read_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const std::filesystem::path& path,
                          const FeatureBatch& b);

[[nodiscard]] FeatureBatch read_csv_matrix(const std::filesystem::path& path);

// Reads either format, deciding by the magic bytes.
[[nodiscard]] FeatureBatch load_features(const std::filesystem::path& path);

[[nodiscard]] LcmParams read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const LcmParams& p);

}  // namespace lcm
