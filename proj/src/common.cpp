#include "causeway/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

namespace causeway {

namespace log {
namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

Sink& sink_slot() {
    static Sink sink = [](Level level, std::string_view message) {
        if (level == Level::warn) std::cerr << "warning: " << message << '\n';
    };
    return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
    std::lock_guard lock(sink_mutex());
    Sink previous = std::move(sink_slot());
    sink_slot() = std::move(sink);
    return previous;
}

void emit(Level level, std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (sink_slot()) sink_slot()(level, message);
}

Capture::Capture() {
    previous_ = set_sink([this](Level level, std::string_view message) {
        if (level == Level::warn) warnings_.emplace_back(message);
    });
}

Capture::~Capture() { set_sink(std::move(previous_)); }

bool Capture::contains(std::string_view needle) const {
    return std::any_of(warnings_.begin(), warnings_.end(),
                       [&](const std::string& w) { return w.find(needle) != std::string::npos; });
}

}  // namespace log

namespace {
std::atomic<unsigned> g_jobs{0};
}

unsigned default_jobs() {
    const unsigned configured = g_jobs.load();
    if (configured > 0) return configured;
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_jobs(unsigned jobs) { g_jobs.store(jobs); }

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = default_jobs();
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(jobs, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

}  // namespace causeway
