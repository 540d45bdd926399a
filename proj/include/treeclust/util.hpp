#pragma once

#include <cstdint>
#include <future>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace treeclust {

/// Deterministic uniform generator. std::uniform_real_distribution is not
/// pinned down by the standard, so draws are built directly from the raw
/// 64-bit stream; identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

/// Worker cap: min(hardware_concurrency, TREECLUST_THREADS if set). At least 1.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("TREECLUST_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && static_cast<unsigned long>(v) < hw) hw = static_cast<unsigned>(v);
    }
    return hw;
}

/// Runs fn(i) for i in [0, count) over a bounded worker pool. fn must only
/// write to per-i state; iteration order within a worker is ascending, so
/// results are independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    unsigned workers = worker_count();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace treeclust
