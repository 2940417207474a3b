#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace actloss {

/// RFC 4180 quoting: fields containing a separator, quote or line break are
/// wrapped in quotes with inner quotes doubled.
inline std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

inline std::string fmt_num(double v, int digits = 12)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << csv_escape(fields[i]);
        }
        out_ << "\r\n";
    }

private:
    std::ostream& out_;
};

/// Column-aligned plain text table.
class TextTable {
public:
    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
    void rule() { rows_.emplace_back(); }

    void print(std::ostream& out) const
    {
        std::vector<std::size_t> width;
        for (const auto& r : rows_)
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (width.size() <= i)
                    width.push_back(0);
                width[i] = std::max(width[i], r[i].size());
            }
        std::size_t total = 0;
        for (auto w : width)
            total += w + 3;
        for (const auto& r : rows_) {
            if (r.empty()) {
                out << std::string(total > 1 ? total - 1 : 0, '-') << '\n';
                continue;
            }
            for (std::size_t i = 0; i < r.size(); ++i) {
                out << r[i] << std::string(width[i] - r[i].size(), ' ');
                if (i + 1 < r.size())
                    out << " | ";
            }
            out << '\n';
        }
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

} // namespace actloss
