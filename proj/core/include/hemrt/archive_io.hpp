#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hemrt/memory_hierarchy.hpp"

namespace hemrt {

// File-backed archive: one `class_<label>.bin` per class, each a sequence of
// little-endian records
//
//   u64 id | i32 label | u32 payload_len | payload_len x f32
//
// payload_len counts floats, not bytes. size_bytes is a stream-level
// constant and is not persisted; loaders supply it.

std::filesystem::path class_file_path(const std::filesystem::path& dir, ClassId label);

void write_class_file(const std::filesystem::path& file,
                      const std::vector<SampleRef>& samples);
std::vector<SampleRef> read_class_file(const std::filesystem::path& file,
                                       std::uint32_t size_bytes);

void save_archive(const StorageArchive& archive, const std::filesystem::path& dir);
StorageArchive load_archive(const std::filesystem::path& dir, std::uint32_t size_bytes,
                            std::optional<std::int64_t> capacity = std::nullopt);

}  // namespace hemrt
