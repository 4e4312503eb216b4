#pragma once

#include <cstdint>
#include <cstring>
#include <string>

namespace qholo {

// FNV-1a 64-bit. Used for provenance fingerprints in manifests and hologram
// metadata; not cryptographic.
class Fnv1a {
public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    template <typename T>
    void update_pod(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        update(&v, sizeof(T));
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t fnv1a(const void* data, std::size_t n) {
    Fnv1a h;
    h.update(data, n);
    return h.digest();
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

inline std::string hex_digest(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace qholo
