#include "stochlab/dates.hpp"

#include <cctype>
#include <cstdio>

#include "stochlab/errors.hpp"

namespace stochlab {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

Date parse_date(const std::string& iso) {
    // Exactly yyyy-mm-dd; no trailing garbage.
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw InvalidInput("unparseable date: '" + iso + "' (expected yyyy-mm-dd)");
    }
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(iso[i]))) {
            throw InvalidInput("unparseable date: '" + iso + "' (expected yyyy-mm-dd)");
        }
    }
    Date d;
    d.year = std::stoi(iso.substr(0, 4));
    d.month = std::stoi(iso.substr(5, 2));
    d.day = std::stoi(iso.substr(8, 2));
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        throw InvalidInput("invalid calendar date: '" + iso + "'");
    }
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

Date add_days(Date d, int n) {
    while (n > 0) {
        ++d.day;
        if (d.day > days_in_month(d.year, d.month)) {
            d.day = 1;
            ++d.month;
            if (d.month > 12) {
                d.month = 1;
                ++d.year;
            }
        }
        --n;
    }
    while (n < 0) {
        --d.day;
        if (d.day < 1) {
            --d.month;
            if (d.month < 1) {
                d.month = 12;
                --d.year;
            }
            d.day = days_in_month(d.year, d.month);
        }
        ++n;
    }
    return d;
}

DateRange parse_date_range(const std::string& text) {
    auto sep = text.find("..");
    if (sep == std::string::npos) {
        throw InvalidInput("invalid date range: '" + text + "' (expected A..B)");
    }
    DateRange r{parse_date(text.substr(0, sep)), parse_date(text.substr(sep + 2))};
    if (r.end < r.start) {
        throw InvalidInput("invalid date range: start after end in '" + text + "'");
    }
    return r;
}

std::string format_date_range(const DateRange& r) {
    return format_date(r.start) + ".." + format_date(r.end);
}

} // namespace stochlab
