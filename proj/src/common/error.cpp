// SPDX-License-Identifier: Apache-2.0
#include "pathnav/error.hpp"

namespace pathnav
{

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code)
    {
        case ErrorCode::Io: return "io";
        case ErrorCode::CorruptHeader: return "corrupt-header";
        case ErrorCode::Unsupported: return "unsupported";
        case ErrorCode::InvalidSpec: return "invalid-spec";
        case ErrorCode::DegenerateSlide: return "degenerate-slide";
        case ErrorCode::Capacity: return "capacity";
        case ErrorCode::Range: return "range";
        case ErrorCode::Grammar: return "grammar";
        case ErrorCode::OffCandidate: return "off-candidate";
        case ErrorCode::Transport: return "transport";
        case ErrorCode::CacheMiss: return "cache-miss";
        case ErrorCode::Precondition: return "precondition";
        case ErrorCode::EmptyEvidence: return "empty-evidence";
        case ErrorCode::UnknownLabel: return "unknown-label";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::LengthMismatch: return "length-mismatch";
        case ErrorCode::Undefined: return "undefined";
        case ErrorCode::Config: return "config";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message):
    std::runtime_error(std::string(to_string(code)) + ": " + message), _code(code)
{
}

} // namespace pathnav
