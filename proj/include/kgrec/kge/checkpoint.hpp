#pragma once

#include <filesystem>
#include <iosfwd>

#include "kgrec/kge/model.hpp"

namespace kgrec::kge {

// Little-endian layout:
//   "KGE1" | u8 kind | u64 dim | u64 n_entities | u64 n_relations
//   | f64 entity matrix (row-major) | f64 relation matrix
//   | u64 entity term ids | u64 relation term ids

void save_checkpoint(const EmbeddingModel& model, std::ostream& out);
void save_checkpoint(const EmbeddingModel& model, const std::filesystem::path& path);

/// Throws FormatError on a bad magic, unknown kind or truncation.
EmbeddingModel load_checkpoint(std::istream& in);
EmbeddingModel load_checkpoint(const std::filesystem::path& path);

}  // namespace kgrec::kge
