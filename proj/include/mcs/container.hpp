#pragma once

// Manifest + blob container shared by dictionary and matrix files.
//
//   bytes 0..7    magic (8 ASCII bytes, identifies the payload kind)
//   bytes 8..15   manifest length L, unsigned 64-bit little endian
//   next L bytes  manifest, JSON text (UTF-8)
//   remainder     blob of little-endian IEEE-754 doubles
//
// Offsets stored in the manifest are byte offsets into the blob.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcs/error.hpp"

namespace mcs {

inline constexpr int kFormatVersion = 1;

struct Container {
  nlohmann::json manifest;
  std::vector<double> blob;
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

inline void write_container(const std::string& path, std::string_view magic, const Container& c) {
  if (magic.size() != 8) throw std::invalid_argument("write_container: magic must be 8 bytes");
  const std::string manifest = c.manifest.dump(1);
  std::string bytes;
  bytes.reserve(16 + manifest.size() + 8 * c.blob.size());
  bytes.append(magic);
  detail::put_u64(bytes, manifest.size());
  bytes.append(manifest);
  for (double v : c.blob) detail::put_u64(bytes, std::bit_cast<std::uint64_t>(v));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline Container read_container(const std::string& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), magic.data(), 8) != 0) {
    throw ParseError(path + ": bad header");
  }
  const std::uint64_t len = detail::get_u64(bytes.data() + 8);
  if (len > bytes.size() - 16) throw ParseError(path + ": truncated manifest");
  Container c;
  try {
    c.manifest = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": malformed manifest: " + e.what());
  }
  if (!c.manifest.is_object() || !c.manifest.contains("format_version")) {
    throw ParseError(path + ": manifest lacks format_version");
  }
  if (c.manifest["format_version"] != kFormatVersion) {
    throw ParseError(path + ": unsupported format version " + c.manifest["format_version"].dump());
  }
  const std::size_t blob_bytes = bytes.size() - 16 - len;
  const std::uint64_t declared = c.manifest.value("blob_bytes", std::uint64_t{0});
  if (blob_bytes < declared) throw ParseError(path + ": truncated blob");
  if (blob_bytes != declared || declared % 8 != 0) throw ParseError(path + ": blob size mismatch");
  c.blob.resize(declared / 8);
  const unsigned char* p = bytes.data() + 16 + len;
  for (std::size_t i = 0; i < c.blob.size(); ++i) c.blob[i] = std::bit_cast<double>(detail::get_u64(p + 8 * i));
  return c;
}

}  // namespace mcs
