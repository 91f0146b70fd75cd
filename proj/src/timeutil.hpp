#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace microagg::timeutil {

// Civil <-> epoch conversions (proleptic Gregorian, UTC only).
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

/// ISO weekday with Monday = 0 .. Sunday = 6.
int weekday_from_days(std::int64_t days);

/// Parses "YYYY-MM-DD[ T]hh:mm[:ss[.fffff]][Z]" as UTC epoch seconds.
/// Fractional seconds are accepted and discarded. Throws ParseError.
std::int64_t parse_utc(std::string_view text);

/// Parses a bare "YYYY-MM-DD" date as UTC epoch days. Throws ParseError.
std::int64_t parse_utc_date(std::string_view text);

/// "YYYY-MM-DDThh:mm:ssZ"
std::string format_utc(std::int64_t epoch_seconds);

/// "YYYY-MM-DD" for an epoch-day count.
std::string format_date(std::int64_t epoch_days);

/// Current wall-clock time formatted as ISO-8601 UTC.
std::string now_utc_string();

}  // namespace microagg::timeutil
