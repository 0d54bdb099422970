// Copyright 2026 The mchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace mchain {

inline int default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Runs produce(i) for i in [0, count) on up to `workers` threads and hands the
// results to consume() strictly in index order on the calling thread. The result
// therefore does not depend on the worker count or on scheduling. The first
// exception thrown (lowest index among those observed) is rethrown.
template <class Produce, class Consume>
void ordered_map_reduce(std::size_t count, int workers, Produce&& produce, Consume&& consume) {
    using Result = decltype(produce(std::size_t{0}));
    workers = std::max(1, std::min<int>(workers, static_cast<int>(std::min<std::size_t>(count, 1u << 16))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) consume(produce(i));
        return;
    }

    std::mutex mu;
    std::condition_variable cv;
    std::map<std::size_t, Result> ready;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::size_t error_index = count;
    // bound look-ahead so memory stays proportional to the worker count
    const std::size_t window = static_cast<std::size_t>(workers) * 2;
    std::size_t consumed = 0;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || stop.load()) return;
            {
                std::unique_lock lk(mu);
                cv.wait(lk, [&] { return i < consumed + window || stop.load(); });
                if (stop.load()) return;
            }
            try {
                Result r = produce(i);
                std::lock_guard lk(mu);
                ready.emplace(i, std::move(r));
            } catch (...) {
                std::lock_guard lk(mu);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                stop.store(true);
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);

    std::exception_ptr consume_error;
    while (consumed < count) {
        Result r;
        {
            std::unique_lock lk(mu);
            cv.wait(lk, [&] { return ready.count(consumed) || stop.load(); });
            auto it = ready.find(consumed);
            if (it == ready.end()) break;
            r = std::move(it->second);
            ready.erase(it);
        }
        try {
            consume(std::move(r));
        } catch (...) {
            consume_error = std::current_exception();
            stop.store(true);
        }
        {
            std::lock_guard lk(mu);
            ++consumed;
        }
        cv.notify_all();
        if (consume_error) break;
    }
    stop.store(true);
    cv.notify_all();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    if (consume_error) std::rethrow_exception(consume_error);
}

}  // namespace mchain
