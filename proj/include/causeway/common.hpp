#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causeway {

/// Input that violates a documented contract (bad schema, unknown name,
/// out-of-range parameter). The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure that the caller may be able to work around
/// (e.g. a singular conditioning covariance).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace log {

enum class Level { debug, info, warn };

using Sink = std::function<void(Level, std::string_view)>;

// Installs a process-wide sink and returns the previous one. The default
// sink prints warnings to stderr and drops everything else.
Sink set_sink(Sink sink);
void emit(Level level, std::string_view message);

inline void warn(std::string_view message) { emit(Level::warn, message); }
inline void info(std::string_view message) { emit(Level::info, message); }
inline void debug(std::string_view message) { emit(Level::debug, message); }

/// Collects messages for the lifetime of the object; restores the previous
/// sink on destruction. Used by tests to assert on warnings.
class Capture {
public:
    Capture();
    ~Capture();
    Capture(const Capture&) = delete;
    Capture& operator=(const Capture&) = delete;

    const std::vector<std::string>& warnings() const { return warnings_; }
    bool contains(std::string_view needle) const;

private:
    Sink previous_;
    std::vector<std::string> warnings_;
};

}  // namespace log

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled
/// exactly once; results must be written to per-index slots by the caller.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// Default worker count for the process (set from the CLI `--jobs` flag).
unsigned default_jobs();
void set_default_jobs(unsigned jobs);

/// 64-bit FNV-1a, used for config hashes and stream keys.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

inline constexpr std::string_view kToolVersion = "0.3.0";

}  // namespace causeway
