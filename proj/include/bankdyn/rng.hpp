#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace bankdyn {

/// Seed for an independent sub-stream, derived by stable hashing of
/// (root seed, purpose, index). Identical on every platform.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                                        std::uint64_t index) noexcept;

/// mt19937_64 with portable transforms. The standard distributions are
/// implementation-defined, so uniform/normal/index draws are done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform();
    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Marsaglia polar method).
    [[nodiscard]] double normal();
    /// Uniform integer in [0, n), unbiased.
    [[nodiscard]] std::size_t below(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t k = items.size(); k > 1; --k) {
            std::swap(items[k - 1], items[below(k)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bankdyn
