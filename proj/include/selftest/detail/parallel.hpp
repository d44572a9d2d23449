#pragma once

// Deterministic parallel minimum over an index range.  The range is split
// into one contiguous chunk per worker; partial results are merged in chunk
// order, and ties are broken toward the lowest index, so the outcome does not
// depend on the worker count.

#include <cstddef>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

namespace selftest::detail {

struct MinResult {
    double value = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
};

inline std::size_t resolve_thread_count(std::size_t requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<std::size_t>(hw);
}

template <typename Fn>
MinResult parallel_min(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = resolve_thread_count(threads);
    if (threads > count) threads = count == 0 ? 1 : count;

    auto scan = [&fn](std::size_t begin, std::size_t end, MinResult& out) {
        MinResult local;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = fn(i);
            if (v < local.value) {
                local.value = v;
                local.index = i;
            }
        }
        out = local;
    };

    std::vector<MinResult> partial(threads);
    if (threads <= 1) {
        scan(0, count, partial[0]);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(threads);
        const std::size_t chunk = (count + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(count, begin + chunk);
            workers.emplace_back(scan, begin, end, std::ref(partial[w]));
        }
        for (auto& t : workers) t.join();
    }

    MinResult best;
    for (const auto& p : partial) {
        if (p.value < best.value || (p.value == best.value && p.index < best.index)) {
            best = p;
        }
    }
    return best;
}

}  // namespace selftest::detail
