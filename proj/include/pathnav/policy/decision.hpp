// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/slide/geometry.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace pathnav::policy
{

inline constexpr std::string_view kNoJustification = "(no justification)";

/// One policy output. point/level are meaningful unless terminate is set
/// without a coordinate line (has_point == false).
struct Decision
{
    slide::NormPoint point;
    int level = 0;
    std::string justification{kNoJustification};
    bool terminate = false;
    bool has_point = true;
    std::optional<double> stop_confidence;

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// 1.0 for TERMINATE, the parsed confidence when present, else 0.0.
[[nodiscard]] double stop_probability(const Decision& d) noexcept;

/// Parses `<<x=NUM, y=NUM, level=INT[, confidence=NUM]>>` (the last
/// well-formed occurrence wins) and a word-bounded TERMINATE token.
/// Throws Grammar when neither is present and Range for out-of-range fields.
[[nodiscard]] Decision parse_decision(std::string_view response);

/// Canonical two-line rendering; coordinates to 4 decimals. parse_decision
/// inverts it on (point, level, terminate).
[[nodiscard]] std::string format_decision(const Decision& d);

enum class SnapKind
{
    Echo,    // within delta/2: treated as a verbatim echo
    Snapped, // within delta: moved to the candidate
};

struct SnapResult
{
    std::size_t index = 0;
    double distance = 0.0;
    SnapKind kind = SnapKind::Echo;
};

/// Moves d.point onto the nearest candidate. Throws OffCandidate when every
/// candidate is farther than delta.
SnapResult snap_to_candidates(Decision& d, std::span<const slide::NormPoint> candidates, double delta);

} // namespace pathnav::policy
