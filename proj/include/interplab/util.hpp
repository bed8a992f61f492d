#pragma once
// Small shared utilities: error types, logging, numeric formatting.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace interplab {

// Input/format problems (bad files, bad flag values, precondition violations
// that a caller can trigger with bad data).  CLI maps these to exit code 2.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A construction whose documented invariant failed (e.g. a partition-of-unity
// denominator vanished).  These indicate the instance is outside the regime
// the construction supports, not a programming bug.
struct construction_error : std::runtime_error {
    explicit construction_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by the global decomposition when the bad set is the whole space and
// the caller must switch to the localized variant.
struct needs_local_variant : construction_error {
    explicit needs_local_variant(const std::string& msg) : construction_error(msg) {}
};

enum class log_level { error = 0, info = 1, debug = 2 };

// Level comes from INTERPLAB_LOG (error|info|debug), default error.
inline log_level current_log_level() {
    static log_level lvl = [] {
        const char* e = std::getenv("INTERPLAB_LOG");
        if (!e) return log_level::error;
        if (std::strcmp(e, "debug") == 0) return log_level::debug;
        if (std::strcmp(e, "info") == 0) return log_level::info;
        return log_level::error;
    }();
    return lvl;
}

template <class... Args>
void log_msg(log_level lvl, const char* fmt, Args... args) {
    if (static_cast<int>(lvl) > static_cast<int>(current_log_level())) return;
    const char* tag = lvl == log_level::error ? "error" : (lvl == log_level::info ? "info" : "debug");
    std::fprintf(stderr, "[interplab %s] ", tag);
    if constexpr (sizeof...(Args) == 0)
        std::fputs(fmt, stderr);
    else
        std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

// Round-trip safe decimal rendering of a double (17 significant digits).
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// x^e by repeated multiplication.  Unlike std::pow this commutes exactly with
// scaling by powers of two, which keeps threshold comparisons reproducible
// under exact field scalings.
inline double pow_int(double x, int e) {
    double acc = 1.0;
    for (int k = 0; k < e; ++k) acc *= x;
    return acc;
}

inline bool is_integral(double v) { return v == static_cast<double>(static_cast<long long>(v)); }

// x^q via pow_int when q is a small integer, std::pow otherwise.
inline double pow_exp(double x, double q) {
    if (q >= 1.0 && q < 64.0 && is_integral(q)) return pow_int(x, static_cast<int>(q));
    return std::pow(x, q);
}

inline constexpr const char* tool_version = "0.1.0";

}  // namespace interplab
