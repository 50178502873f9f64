#include "tsf/hash.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "tsf/errors.hpp"

namespace tsf {

std::uint64_t fnv1a64(std::span<const char> bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_string(std::span<const char> bytes) {
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes);
    return out.str();
}

namespace {
std::vector<char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}
}  // namespace

std::string hash_file(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    return hash_string(bytes);
}

std::string hash_files(std::span<const std::filesystem::path> paths) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : paths) {
        const auto bytes = slurp(p);
        h = fnv1a64(bytes, h);
    }
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

}  // namespace tsf
