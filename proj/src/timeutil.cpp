#include "timeutil.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

#include "errors.hpp"

namespace microagg::timeutil {

// Howard Hinnant's algorithms, valid across the proleptic Gregorian calendar.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

int weekday_from_days(std::int64_t days) {
    // 1970-01-01 was a Thursday (= 3 with Monday == 0).
    return static_cast<int>(((days % 7) + 10) % 7);
}

namespace {

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

[[noreturn]] void bad_timestamp(std::string_view text) {
    fail(ErrorCode::ParseError, "unparseable timestamp: '" + std::string(text) + "'");
}

}  // namespace

std::int64_t parse_utc_date(std::string_view s) {
    unsigned y = 0, mo = 0, d = 0;
    if (!parse_fixed_uint(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || s[7] != '-' ||
        !parse_fixed_uint(s, 5, 2, mo) || !parse_fixed_uint(s, 8, 2, d))
        bad_timestamp(s);
    if (mo < 1 || mo > 12 || d < 1 || d > 31) bad_timestamp(s);
    return days_from_civil(static_cast<int>(y), mo, d);
}

std::int64_t parse_utc(std::string_view s) {
    // Trim surrounding whitespace.
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() == 10) return parse_utc_date(s) * 86400;
    if (s.size() < 16) bad_timestamp(s);

    const std::int64_t days = parse_utc_date(s.substr(0, 10));
    if (s[10] != 'T' && s[10] != ' ') bad_timestamp(s);

    unsigned hh = 0, mm = 0, ss = 0;
    if (!parse_fixed_uint(s, 11, 2, hh) || s[13] != ':' || !parse_fixed_uint(s, 14, 2, mm))
        bad_timestamp(s);
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (!parse_fixed_uint(s, pos + 1, 2, ss)) bad_timestamp(s);
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        }
    }
    if (pos < s.size()) {
        if (s[pos] != 'Z' || pos + 1 != s.size()) bad_timestamp(s);
    }
    if (hh > 23 || mm > 59 || ss > 60) bad_timestamp(s);
    return days * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_utc(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(sod / 3600), static_cast<long long>((sod / 60) % 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

std::string format_date(std::int64_t epoch_days) {
    int y;
    unsigned mo, d;
    civil_from_days(epoch_days, y, mo, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, mo, d);
    return buf;
}

std::string now_utc_string() {
    const auto now = std::chrono::system_clock::now();
    return format_utc(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

}  // namespace microagg::timeutil
