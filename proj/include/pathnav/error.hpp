// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pathnav
{

enum class ErrorCode
{
    Io,
    CorruptHeader,
    Unsupported,
    InvalidSpec,
    DegenerateSlide,
    Capacity,
    Range,
    Grammar,
    OffCandidate,
    Transport,
    CacheMiss,
    Precondition,
    EmptyEvidence,
    UnknownLabel,
    Parse,
    LengthMismatch,
    Undefined,
    Config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the whole library; callers branch on code().
class Error: public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return _code; }

private:
    ErrorCode _code;
};

} // namespace pathnav
