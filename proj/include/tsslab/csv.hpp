#pragma once

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace tsslab::csv {

/// Nine significant digits, '.' separator, "inf"/"-inf"/"nan" spelled out.
inline std::string number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Writes comma-separated rows terminated by '\n'.
class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    void header(std::initializer_list<std::string_view> cols)
    {
        bool first = true;
        for (auto c : cols) {
            if (!first)
                os_ << ',';
            os_ << c;
            first = false;
        }
        os_ << '\n';
    }

    Writer& field(double v)
    {
        sep();
        os_ << number(v);
        return *this;
    }

    Writer& field(int v)
    {
        sep();
        os_ << v;
        return *this;
    }

    Writer& field(std::string_view s)
    {
        sep();
        os_ << s;
        return *this;
    }

    void end_row()
    {
        os_ << '\n';
        fresh_ = true;
    }

private:
    void sep()
    {
        if (!fresh_)
            os_ << ',';
        fresh_ = false;
    }

    std::ostream& os_;
    bool fresh_ = true;
};

} // namespace tsslab::csv
