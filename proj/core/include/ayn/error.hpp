#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ayn {

inline constexpr std::string_view kVersion = "0.1.0";

/// Library-wide error with a short machine-readable code ("shape",
/// "format", "io", ...) plus a human message. The CLI serializes the
/// code into its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace ayn
