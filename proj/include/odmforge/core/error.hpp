#pragma once

#include <stdexcept>
#include <string>

namespace odmforge {

// Every failure mode the toolkit reports, named after the contract it breaks.
enum class Errc {
    missing_field,
    invalid_range,
    unknown_zoning,
    malformed_row,
    negative_count,
    window_misaligned,
    threshold_violation,
    mixed_providers,
    unmapped_zone,
    bad_weights,
    non_divisible_window,
    already_extrapolated,
    level_unavailable,
    insufficient_baseline,
    empty_day,
    alpha_out_of_range,
    missing_geometry,
    invalid_spec,
    storage_unavailable,
    io_error,
    bad_config,
};

const char* errc_name(Errc code);

class OdmError : public std::runtime_error {
  public:
    OdmError(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw OdmError(code, message);
}

} // namespace odmforge
