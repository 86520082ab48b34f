#include "obeskit/core/timezone.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>

namespace obeskit::tz {

// Howard Hinnant's public-domain civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

namespace {

std::int64_t read_be(const unsigned char* p, int bytes) {
    std::int64_t v = 0;
    for (int i = 0; i < bytes; ++i) v = (v << 8) | p[i];
    // Sign-extend.
    const int shift = 64 - 8 * bytes;
    return (v << shift) >> shift;
}

bool parse_fixed(const std::string& name, int& offset_s) {
    if (name == "UTC" || name == "Z") {
        offset_s = 0;
        return true;
    }
    if (name.rfind("UTC", 0) != 0 || name.size() < 4) return false;
    const char sign_c = name[3];
    if (sign_c != '+' && sign_c != '-') return false;
    const std::string rest = name.substr(4);
    int hh = 0, mm = 0;
    if (rest.size() == 5 && rest[2] == ':') {
        if (!std::isdigit(rest[0]) || !std::isdigit(rest[1]) || !std::isdigit(rest[3]) ||
            !std::isdigit(rest[4]))
            return false;
        hh = (rest[0] - '0') * 10 + (rest[1] - '0');
        mm = (rest[3] - '0') * 10 + (rest[4] - '0');
    } else if (rest.size() == 2 && std::isdigit(rest[0]) && std::isdigit(rest[1])) {
        hh = (rest[0] - '0') * 10 + (rest[1] - '0');
    } else {
        return false;
    }
    if (hh > 18 || mm > 59) return false;
    offset_s = (hh * 3600 + mm * 60) * (sign_c == '-' ? -1 : 1);
    return true;
}

// Minimal POSIX TZ string parser: handles "STDoffset[DST[offset],start,end]"
// with Mm.w.d[/time] rule endpoints, which covers the zoneinfo footers we
// care about. Returns false for anything else.
struct PosixTz {
    int std_offset_s = 0;
    bool has_dst = false;
    int dst_offset_s = 0;
    int sm = 0, sw = 0, sd = 0, ss = 2 * 3600;
    int em = 0, ew = 0, ed = 0, es = 2 * 3600;
};

bool parse_posix_tz(const std::string& s, PosixTz& out) {
    std::size_t i = 0;
    const std::size_t n = s.size();

    auto skip_name = [&]() -> bool {
        if (i < n && s[i] == '<') {
            while (i < n && s[i] != '>') ++i;
            if (i >= n) return false;
            ++i;
            return true;
        }
        std::size_t start = i;
        while (i < n && (std::isalpha(static_cast<unsigned char>(s[i])))) ++i;
        return i - start >= 3;
    };
    auto parse_int = [&](int& v) -> bool {
        bool neg = false;
        if (i < n && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
        if (i >= n || !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = 0;
        while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) v = v * 10 + (s[i++] - '0');
        if (neg) v = -v;
        return true;
    };
    auto parse_offset = [&](int& seconds) -> bool {
        int h = 0, m = 0, sec = 0;
        if (!parse_int(h)) return false;
        if (i < n && s[i] == ':') {
            ++i;
            if (!parse_int(m)) return false;
            if (i < n && s[i] == ':') {
                ++i;
                if (!parse_int(sec)) return false;
            }
        }
        const int sign = h < 0 ? -1 : 1;
        seconds = sign * (std::abs(h) * 3600 + m * 60 + sec);
        return true;
    };
    auto parse_rule = [&](int& mo, int& wk, int& wd, int& at) -> bool {
        if (i >= n || s[i] != 'M') return false;  // only M-rules supported
        ++i;
        int m = 0, w = 0, d = 0;
        if (!parse_int(m)) return false;
        if (i >= n || s[i] != '.') return false;
        ++i;
        if (!parse_int(w)) return false;
        if (i >= n || s[i] != '.') return false;
        ++i;
        if (!parse_int(d)) return false;
        at = 2 * 3600;
        if (i < n && s[i] == '/') {
            ++i;
            int t = 0;
            if (!parse_offset(t)) return false;
            at = t;
        }
        mo = m;
        wk = w;
        wd = d;
        return true;
    };

    if (!skip_name()) return false;
    int std_off = 0;
    if (!parse_offset(std_off)) return false;
    out.std_offset_s = -std_off;  // POSIX sign convention is inverted

    if (i == n) return true;  // no DST

    if (!skip_name()) return false;
    out.has_dst = true;
    if (i < n && s[i] != ',') {
        int dst_off = 0;
        if (!parse_offset(dst_off)) return false;
        out.dst_offset_s = -dst_off;
    } else {
        out.dst_offset_s = out.std_offset_s + 3600;
    }
    if (i >= n || s[i] != ',') return false;
    ++i;
    if (!parse_rule(out.sm, out.sw, out.sd, out.ss)) return false;
    if (i >= n || s[i] != ',') return false;
    ++i;
    if (!parse_rule(out.em, out.ew, out.ed, out.es)) return false;
    return i == n;
}

}  // namespace

Zone Zone::load(const std::string& name) {
    Zone z;
    z.name_ = name;

    if (parse_fixed(name, z.fixed_offset_s_)) {
        z.fixed_ = true;
        return z;
    }

    if (name.empty() || name[0] == '/' || name.find("..") != std::string::npos)
        throw ConfigError("invalid timezone name: " + name);

    const std::string path = "/usr/share/zoneinfo/" + name;
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("unknown timezone: " + name);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 44 || std::memcmp(buf.data(), "TZif", 4) != 0)
        throw ConfigError("not a timezone database file: " + name);

    // Header layout per RFC 8536. Version byte selects 32- or 64-bit block.
    auto read_header = [&](std::size_t off, std::int64_t cnt[6]) {
        for (int k = 0; k < 6; ++k) cnt[k] = read_be(buf.data() + off + 20 + 4 * k, 4);
    };

    std::int64_t c[6];  // isutcnt isstdcnt leapcnt timecnt typecnt charcnt
    read_header(0, c);
    const char version = static_cast<char>(buf[4]);

    std::size_t off = 44;
    int time_size = 4;
    if (version >= '2') {
        // Skip the v1 block, then read the v2+ header and use 64-bit data.
        off += c[3] * 5 + c[4] * 6 + c[5] + c[2] * 8 + c[0] + c[1];
        if (off + 44 > buf.size() || std::memcmp(buf.data() + off, "TZif", 4) != 0)
            throw ConfigError("corrupt timezone database file: " + name);
        read_header(off, c);
        off += 44;
        time_size = 8;
    }

    const std::int64_t timecnt = c[3], typecnt = c[4], charcnt = c[5];
    const std::int64_t leapcnt = c[2], isstdcnt = c[1], isutcnt = c[0];
    if (typecnt <= 0) throw ConfigError("corrupt timezone database file: " + name);

    const std::size_t trans_off = off;
    const std::size_t idx_off = trans_off + timecnt * time_size;
    const std::size_t type_off = idx_off + timecnt;
    const std::size_t after_types = type_off + typecnt * 6 + charcnt +
                                    leapcnt * (time_size + 4) + isstdcnt + isutcnt;
    if (after_types > buf.size()) throw ConfigError("corrupt timezone database file: " + name);

    struct TType {
        int offset_s;
        bool dst;
    };
    std::vector<TType> types(typecnt);
    for (std::int64_t t = 0; t < typecnt; ++t) {
        const unsigned char* p = buf.data() + type_off + t * 6;
        types[t] = {static_cast<int>(read_be(p, 4)), p[4] != 0};
    }

    z.transitions_.reserve(timecnt);
    for (std::int64_t t = 0; t < timecnt; ++t) {
        const std::int64_t at = read_be(buf.data() + trans_off + t * time_size, time_size);
        const unsigned char ti = buf[idx_off + t];
        if (ti >= types.size()) throw ConfigError("corrupt timezone database file: " + name);
        z.transitions_.push_back({at, types[ti].offset_s, types[ti].dst});
    }

    // First non-DST type, else type 0, rules the era before the first transition.
    z.first_offset_s_ = types[0].offset_s;
    for (const TType& t : types) {
        if (!t.dst) {
            z.first_offset_s_ = t.offset_s;
            break;
        }
    }

    // Optional footer: "\n<posix tz>\n" after the v2 data block.
    if (version >= '2' && after_types < buf.size() && buf[after_types] == '\n') {
        std::size_t e = after_types + 1;
        while (e < buf.size() && buf[e] != '\n') ++e;
        const std::string footer(buf.begin() + after_types + 1, buf.begin() + e);
        PosixTz p;
        if (!footer.empty() && parse_posix_tz(footer, p)) {
            z.std_offset_s_ = p.std_offset_s;
            if (p.has_dst) {
                z.has_rules_ = true;
                z.dst_offset_s_ = p.dst_offset_s;
                z.dst_start_ = {p.sm, p.sw, p.sd, p.ss};
                z.dst_end_ = {p.em, p.ew, p.ed, p.es};
            } else {
                z.has_rules_ = true;
                z.dst_offset_s_ = p.std_offset_s;
                z.dst_start_ = {};
                z.dst_end_ = {};
            }
        }
    }
    return z;
}

std::int64_t Zone::rule_instant_utc(const Rule& r, int year, int offset_s) {
    // Day of the r.week-th r.weekday of r.month (week 5 = last).
    const std::int64_t first = days_from_civil(year, r.month, 1);
    const int first_wd = static_cast<int>(((first % 7) + 11) % 7);  // 0=Sun for day 0 is Thu
    int day = 1 + ((r.weekday - first_wd) % 7 + 7) % 7 + (r.week - 1) * 7;
    // Clamp "last" weeks back into the month.
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = mdays[r.month - 1];
    if (r.month == 2 && ((year % 4 == 0 && year % 100 != 0) || year % 400 == 0)) dim = 29;
    while (day > dim) day -= 7;
    const std::int64_t local_s =
        days_from_civil(year, r.month, day) * 86400 + r.seconds;
    return local_s - offset_s;
}

int Zone::rule_offset_at(std::int64_t utc_s) const {
    if (!has_rules_ || dst_offset_s_ == std_offset_s_) return std_offset_s_;
    // Determine the year in standard time; transitions near new year are
    // handled by checking the adjacent year's rule instants too.
    int y, m, d;
    civil_from_days((utc_s + std_offset_s_) / 86400 - ((utc_s + std_offset_s_) % 86400 < 0 ? 1 : 0),
                    y, m, d);
    for (int yy : {y - 1, y, y + 1}) {
        const std::int64_t start = rule_instant_utc(dst_start_, yy, std_offset_s_);
        const std::int64_t end = rule_instant_utc(dst_end_, yy, dst_offset_s_);
        if (start <= end) {
            if (utc_s >= start && utc_s < end) return dst_offset_s_;
        } else {  // southern hemisphere: DST spans the new year
            if (utc_s >= start || utc_s < end) {
                // Only within this year's span.
                if (yy == y || (yy == y - 1 && utc_s < end) || (yy == y + 1 && utc_s >= start))
                    return dst_offset_s_;
            }
        }
    }
    return std_offset_s_;
}

int Zone::offset_at(EpochMs t) const {
    if (fixed_) return fixed_offset_s_;
    const std::int64_t s = t >= 0 ? t / 1000 : (t - 999) / 1000;
    if (transitions_.empty() || s < transitions_.front().at_s) {
        if (transitions_.empty() && has_rules_) return rule_offset_at(s);
        return first_offset_s_;
    }
    if (s >= transitions_.back().at_s) {
        // Past the table: fall back to footer rules when available.
        if (has_rules_) return rule_offset_at(s);
        return transitions_.back().offset_s;
    }
    auto it = std::upper_bound(
        transitions_.begin(), transitions_.end(), s,
        [](std::int64_t v, const Transition& tr) { return v < tr.at_s; });
    return std::prev(it)->offset_s;
}

LocalTime Zone::local(EpochMs t) const {
    LocalTime lt;
    lt.utc_offset_s = offset_at(t);
    const std::int64_t s = (t >= 0 ? t / 1000 : (t - 999) / 1000) + lt.utc_offset_s;
    std::int64_t days = s / 86400;
    std::int64_t rem = s % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    civil_from_days(days, lt.year, lt.month, lt.day);
    lt.hour = static_cast<int>(rem / 3600);
    lt.minute = static_cast<int>((rem % 3600) / 60);
    lt.second = static_cast<int>(rem % 60);
    lt.weekday = static_cast<int>(((days % 7) + 11) % 7);  // day 0 (1970-01-01) was Thursday
    return lt;
}

EpochMs Zone::local_day_start(EpochMs t) const {
    const LocalTime lt = local(t);
    const std::int64_t local_midnight_s = days_from_civil(lt.year, lt.month, lt.day) * 86400;
    // The offset at midnight may differ from the offset at t; iterate once.
    std::int64_t utc_s = local_midnight_s - lt.utc_offset_s;
    const int off2 = offset_at(utc_s * 1000);
    if (off2 != lt.utc_offset_s) utc_s = local_midnight_s - off2;
    return utc_s * 1000;
}

std::string Zone::local_date(EpochMs t) const {
    const LocalTime lt = local(t);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", lt.year, lt.month, lt.day);
    return buf;
}

}  // namespace obeskit::tz
