#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sbm {

// Runs fn(i) for i in [begin, end) on up to `jobs` threads. Workers pull
// indices from a shared counter; callers must write results to
// per-index slots so the outcome is independent of scheduling. If any
// call throws, the exception for the smallest index is rethrown.
inline void parallel_for(int begin, int end, int jobs,
                         const std::function<void(int)>& fn) {
    if (end <= begin) return;
    if (jobs <= 1 || end - begin == 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<int> next(begin);
    std::mutex error_mutex;
    int error_index = end;
    std::exception_ptr error;
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= end) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    const int thread_count = std::min(jobs, end - begin);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace sbm
