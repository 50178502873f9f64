#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace tsf {

// FNV-1a 64-bit content hash; compact and dependency-free. Used to fingerprint
// dataset files and config sections, not for security.
std::uint64_t fnv1a64(std::span<const char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hash_string(std::span<const char> bytes);
std::string hash_file(const std::filesystem::path& path);
std::string hash_files(std::span<const std::filesystem::path> paths);

}  // namespace tsf
