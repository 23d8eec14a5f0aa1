#include "odmforge/core/error.hpp"

namespace odmforge {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::missing_field: return "MissingField";
    case Errc::invalid_range: return "InvalidRange";
    case Errc::unknown_zoning: return "UnknownZoning";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::negative_count: return "NegativeCount";
    case Errc::window_misaligned: return "WindowMisaligned";
    case Errc::threshold_violation: return "ThresholdViolation";
    case Errc::mixed_providers: return "MixedProviders";
    case Errc::unmapped_zone: return "UnmappedZone";
    case Errc::bad_weights: return "BadWeights";
    case Errc::non_divisible_window: return "NonDivisibleWindow";
    case Errc::already_extrapolated: return "AlreadyExtrapolated";
    case Errc::level_unavailable: return "LevelUnavailable";
    case Errc::insufficient_baseline: return "InsufficientBaseline";
    case Errc::empty_day: return "EmptyDay";
    case Errc::alpha_out_of_range: return "AlphaOutOfRange";
    case Errc::missing_geometry: return "MissingGeometry";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::storage_unavailable: return "StorageUnavailable";
    case Errc::io_error: return "IoError";
    case Errc::bad_config: return "BadConfig";
    }
    return "UnknownError";
}

} // namespace odmforge
