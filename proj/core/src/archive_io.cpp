#include "hemrt/archive_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace hemrt {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xffu);
    u = static_cast<U>(u >> 8);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<U>((u << 8) | bytes[i]);
  value = static_cast<T>(u);
  return true;
}

}  // namespace

std::filesystem::path class_file_path(const std::filesystem::path& dir, ClassId label) {
  return dir / fmt::format("class_{}.bin", label);
}

void write_class_file(const std::filesystem::path& file,
                      const std::vector<SampleRef>& samples) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  for (const SampleRef& s : samples) {
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(s->id));
    put_le<std::int32_t>(out, s->class_label);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s->features.size()));
    for (float f : s->features) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

std::vector<SampleRef> read_class_file(const std::filesystem::path& file,
                                       std::uint32_t size_bytes) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::vector<SampleRef> out;
  for (;;) {
    std::uint64_t id = 0;
    if (!get_le(in, id)) break;
    std::int32_t label = 0;
    std::uint32_t len = 0;
    if (!get_le(in, label) || !get_le(in, len))
      throw std::runtime_error("truncated record header in " + file.string());
    std::vector<float> payload(len);
    for (auto& f : payload) {
      std::uint32_t bits = 0;
      if (!get_le(in, bits))
        throw std::runtime_error("truncated payload in " + file.string());
      f = std::bit_cast<float>(bits);
    }
    out.push_back(make_sample(static_cast<SampleId>(id), label, std::move(payload), size_bytes));
  }
  return out;
}

void save_archive(const StorageArchive& archive, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [label, samples] : archive.per_class())
    write_class_file(class_file_path(dir, label), samples);
}

StorageArchive load_archive(const std::filesystem::path& dir, std::uint32_t size_bytes,
                            std::optional<std::int64_t> capacity) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("class_") && name.ends_with(".bin"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  StorageArchive archive(capacity);
  for (const auto& f : files) {
    auto samples = read_class_file(f, size_bytes);
    archive.append(samples);
  }
  return archive;
}

}  // namespace hemrt
