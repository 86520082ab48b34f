#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "obeskit/common.hpp"

namespace obeskit::tz {

// Local civil time, decomposed.
struct LocalTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
    int weekday = 4;      // 0 = Sunday .. 6 = Saturday
    int utc_offset_s = 0; // offset in effect at this instant
};

// Resolves UTC instants to local civil time for one zone.
//
// Accepts either an IANA zone name (loaded from the system zoneinfo
// database, binary TZif format) or a fixed offset written as
// "UTC+HH:MM" / "UTC-HH:MM" / "UTC".
class Zone {
public:
    static Zone load(const std::string& name);

    const std::string& name() const { return name_; }

    int offset_at(EpochMs t) const;           // UTC offset in seconds
    LocalTime local(EpochMs t) const;

    // Midnight (00:00 local) of the local day containing t, as a UTC instant.
    EpochMs local_day_start(EpochMs t) const;

    // Key "YYYY-MM-DD" for the local day containing t.
    std::string local_date(EpochMs t) const;

private:
    struct Transition {
        std::int64_t at_s;  // UTC seconds when the new offset takes effect
        int offset_s;
        bool dst;
    };
    struct Rule {  // POSIX TZ M-rule endpoint (Mm.w.d at hh:mm:ss local)
        int month = 0, week = 0, weekday = 0;
        int seconds = 2 * 3600;
    };

    std::string name_;
    bool fixed_ = false;
    int fixed_offset_s_ = 0;

    std::vector<Transition> transitions_;
    int first_offset_s_ = 0;

    bool has_rules_ = false;
    int std_offset_s_ = 0;
    int dst_offset_s_ = 0;
    Rule dst_start_, dst_end_;

    int rule_offset_at(std::int64_t utc_s) const;
    static std::int64_t rule_instant_utc(const Rule& r, int year, int offset_s);
};

// Civil-time helpers (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

}  // namespace obeskit::tz
