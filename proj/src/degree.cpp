#include "contextdl/degree.hpp"

#include <cmath>
#include <cstddef>

namespace contextdl {

std::optional<Degree> Degree::parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '-') {
        negative = true;
        ++i;
    }
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
        return std::nullopt;

    std::int64_t whole = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        whole = whole * 10 + (text[i] - '0');
        if (whole > 1'000'000'000) return std::nullopt;
        ++i;
    }
    std::int64_t frac = 0;
    int frac_digits = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        if (i >= text.size()) return std::nullopt;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            if (++frac_digits > 6) return std::nullopt;
            frac = frac * 10 + (text[i] - '0');
            ++i;
        }
        if (frac_digits == 0) return std::nullopt;
    }
    if (i != text.size()) return std::nullopt;
    for (int d = frac_digits; d < 6; ++d) frac *= 10;
    std::int64_t units = whole * kScale + frac;
    return from_units(negative ? -units : units);
}

Degree Degree::from_double(double v) {
    return from_units(static_cast<std::int64_t>(std::llround(v * kScale)));
}

std::string Degree::to_string() const {
    std::int64_t u = units_;
    std::string sign;
    if (u < 0) {
        sign = "-";
        u = -u;
    }
    std::int64_t whole = u / kScale;
    std::int64_t frac = u % kScale;
    std::string out = sign + std::to_string(whole);
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(digits.begin(), 6 - digits.size(), '0');
        while (!digits.empty() && digits.back() == '0') digits.pop_back();
        out += "." + digits;
    }
    return out;
}

}  // namespace contextdl
