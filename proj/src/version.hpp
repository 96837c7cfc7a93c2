#pragma once

namespace stairway {

inline constexpr const char* kVersion = "0.1.0";

// First line of every file the toolkit writes.  Parsers treat '#' lines as
// comments, so bumping these never breaks old readers.
inline constexpr const char* kCircuitFormat = "# stairway-circuit v1";
inline constexpr const char* kDemFormat = "# stairway-dem v1";
inline constexpr const char* kResultsFormat = "# stairway-results v1";

}  // namespace stairway
