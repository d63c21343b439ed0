#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace longcot {

// 64-bit FNV-1a. Used for request fingerprints, file digests in run
// manifests, and deterministic per-item assignments in fixtures. Not
// cryptographic.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v);

// Whole-file read/write. write_file truncates; read_file throws on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// FNV-1a digest of a file's bytes, hex-encoded.
std::string file_digest(const std::filesystem::path& path);

std::string trim(std::string_view s);

// Runs fn(0..n-1) on a pool of at most max_in_flight threads. At no instant
// are more than max_in_flight calls outstanding. The first exception thrown
// by any task is rethrown after all workers stop.
void run_bounded(std::size_t n, int max_in_flight, const std::function<void(std::size_t)>& fn);

// Collapses runs of whitespace and counts the remaining tokens. Token
// counting for backends that do not report usage.
long whitespace_token_count(std::string_view text);

}  // namespace longcot
