#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace soc {

/// Runs body(acc, i) for i in [0, n_runs) on up to `jobs` threads, each with
/// its own accumulator from make(), then merges them in worker order.
/// Accumulators must merge associatively and commutatively.
template <class MakeAcc, class Body>
auto ensemble_reduce(std::uint64_t n_runs, unsigned jobs, MakeAcc make, Body body) {
    using Acc = decltype(make());
    const unsigned workers =
        static_cast<unsigned>(std::clamp<std::uint64_t>(std::max(1u, jobs), 1, std::max<std::uint64_t>(n_runs, 1)));
    std::vector<Acc> partial;
    partial.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) partial.push_back(make());

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](unsigned w) {
        try {
            for (std::uint64_t i = next++; i < n_runs; i = next++) body(partial[w], i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_runs;
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    Acc result = std::move(partial[0]);
    for (unsigned w = 1; w < workers; ++w) result.merge(partial[w]);
    return result;
}

}  // namespace soc
