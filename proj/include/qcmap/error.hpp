#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcmap {

enum class errc {
    invalid_input,
    degenerate_hint,
    ambiguous_arc,
    invalid_axes,
    outside_range,
    transform_undefined,
    undefined_at_origin,
    outside_shell,
    chart_singularity,
    near_singular_region,
    stencil,
    degenerate_derivative,
    sampling,
    requires_intermediate_waypoint,
    parse,
};

inline std::string_view to_string(errc code)
{
    switch (code) {
    case errc::invalid_input: return "invalid-input";
    case errc::degenerate_hint: return "degenerate-hint";
    case errc::ambiguous_arc: return "ambiguous-arc";
    case errc::invalid_axes: return "invalid-axes";
    case errc::outside_range: return "outside-range";
    case errc::transform_undefined: return "transform-undefined";
    case errc::undefined_at_origin: return "undefined-at-origin";
    case errc::outside_shell: return "outside-shell";
    case errc::chart_singularity: return "chart-singularity";
    case errc::near_singular_region: return "near-singular-region";
    case errc::stencil: return "stencil";
    case errc::degenerate_derivative: return "degenerate-derivative";
    case errc::sampling: return "sampling";
    case errc::requires_intermediate_waypoint: return "requires-intermediate-waypoint";
    case errc::parse: return "parse";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace qcmap
