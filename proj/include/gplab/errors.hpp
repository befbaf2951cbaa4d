#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace gplab {

/*
 * All domain failures are reported as Error with a stable machine-readable
 * name (used by the CLI for exit-code / stderr reporting) plus a free-form
 * human explanation.  Configuration problems use ConfigError so the CLI can
 * distinguish exit code 2 (bad input) from exit code 3 (numerical failure).
 */
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

[[noreturn]] inline void fail(const std::string& name, const std::string& what) {
    throw Error(name, what);
}

[[noreturn]] inline void fail_config(const std::string& name, const std::string& what) {
    throw ConfigError(name, what);
}

inline void require(bool cond, const std::string& name, const std::string& what) {
    if (!cond) fail(name, what);
}

/* Short numeric rendering for error messages. */
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace gplab
