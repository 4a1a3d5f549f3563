#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nnfac/stacked_factor.hpp"

namespace nnfac {

// Matrix files are plain CSV: one row per line, comma-separated decimal
// literals, no header. Loaders reject non-finite values and report the
// offending line; writers round-trip doubles exactly and replace the target
// atomically (temp file + rename).

Matrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const Matrix& m);

// One value per line.
Vector load_column_csv(const std::string& path);

// Two comma-separated nonnegative integers per line (0-based row, col).
std::vector<std::pair<Eigen::Index, Eigen::Index>> load_index_pairs_csv(
    const std::string& path);

// Atomic text write used by all report emitters.
void write_text_atomic(const std::string& path, const std::string& contents);

}  // namespace nnfac
