#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace boilnet {

// Error with a stable category token. The CLI prints these as
// "error:<category>: <message>" on a single line, so the category must not
// contain spaces or colons. Categories in use: usage, config, io, format,
// dimension, value, divergence.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

[[noreturn]] inline void fail(std::string category, const std::string& message) {
    throw Error(std::move(category), message);
}

/// 17 significant digits, enough for a lossless double round-trip in text.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace boilnet
