#pragma once

#include <compare>
#include <string>

namespace stochlab {

// Calendar date. Trading-day gaps are ignored throughout the library: rows of
// a series are one time step apart regardless of weekends or holidays.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
};

// Strict ISO-8601 yyyy-mm-dd. Throws InvalidInput on anything else.
Date parse_date(const std::string& iso);
std::string format_date(const Date& d);

bool is_leap_year(int year);
int days_in_month(int year, int month);
Date add_days(Date d, int n);

// Closed date interval.
struct DateRange {
    Date start;
    Date end;

    bool contains(const Date& d) const { return start <= d && d <= end; }
};

// "yyyy-mm-dd..yyyy-mm-dd", start must not exceed end.
DateRange parse_date_range(const std::string& text);
std::string format_date_range(const DateRange& r);

} // namespace stochlab
