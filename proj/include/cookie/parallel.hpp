#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cookie
{

//! Worker count from a user request; 0 means hardware concurrency.
inline unsigned resolve_workers(unsigned requested) noexcept
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

//---------------------------------------------------------------------------//
/*!
 * Run fn(i) for i in [0, count) on a pool of threads.
 *
 * Indices are handed out in fixed-size blocks. Callers write results into
 * slot i, so the outcome never depends on the worker count or scheduling.
 * The first exception thrown by any task is rethrown on the calling thread.
 */
template<class F>
void parallel_for(std::size_t count, unsigned workers, F&& fn)
{
    workers = static_cast<unsigned>(
        std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(count, 1)));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }

    constexpr std::size_t block = 64;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        try
        {
            for (;;)
            {
                std::size_t start = next.fetch_add(block);
                if (start >= count)
                    return;
                std::size_t stop = std::min(count, start + block);
                for (std::size_t i = start; i < stop; ++i)
                    fn(i);
            }
        }
        catch (...)
        {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error)
                error = std::current_exception();
            next.store(count);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(body);
    body();
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

}  // namespace cookie
