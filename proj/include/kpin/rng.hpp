#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace kpin {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and a sequence of stream labels.
/// The result depends only on the arguments, never on call order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> labels) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t l : labels) h = mix64(h ^ mix64(l + 0x632be59bd9b4e019ULL));
    return h;
}

/// FNV-1a, used to turn algorithm tags into stream labels.
constexpr std::uint64_t tag_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace kpin
