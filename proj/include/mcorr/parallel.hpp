#pragma once

#include <cstddef>
#include <functional>

namespace mcorr {

/// Worker cap used by every parallel loop in the library. Results never
/// depend on this value: work is split into index ranges that are fixed
/// independently of the worker count, and partial results are combined in
/// index order.
unsigned thread_count();

/// Sets the worker cap; 0 selects std::thread::hardware_concurrency().
void set_thread_count(unsigned count);

/// Runs body(i) for every i in [0, count). Indices are claimed dynamically.
/// The first exception (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Restores the previous worker cap on scope exit.
class ScopedThreadCount {
public:
    explicit ScopedThreadCount(unsigned count) : saved_(thread_count()) { set_thread_count(count); }
    ~ScopedThreadCount() { set_thread_count(saved_); }
    ScopedThreadCount(const ScopedThreadCount&) = delete;
    ScopedThreadCount& operator=(const ScopedThreadCount&) = delete;

private:
    unsigned saved_;
};

} // namespace mcorr
