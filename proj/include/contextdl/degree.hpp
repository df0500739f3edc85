#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace contextdl {

/// Confidence degree in [0,1], stored as a fixed-point decimal with six
/// fractional digits so that threshold comparisons at tau == tau_in are exact.
class Degree {
public:
    static constexpr std::int64_t kScale = 1'000'000;

    Degree() : units_(0) {}

    static Degree zero() { return Degree(); }
    static Degree one() { return from_units(kScale); }

    // Parses a decimal literal such as "0.95" or "1". Returns nullopt on
    // malformed text or more than six fractional digits; out-of-range values
    // parse fine and are caught by in_range() so callers can report
    // ConfidenceOutOfRange separately from SyntaxError.
    static std::optional<Degree> parse(const std::string& text);

    // Nearest representable value; used for JSON numbers.
    static Degree from_double(double v);

    static Degree from_units(std::int64_t units) {
        Degree d;
        d.units_ = units;
        return d;
    }

    std::int64_t units() const { return units_; }
    bool in_range() const { return units_ >= 0 && units_ <= kScale; }
    double to_double() const { return static_cast<double>(units_) / kScale; }

    // Canonical decimal rendering: trailing zeros trimmed, "0" / "1" for the
    // endpoints. parse(to_string(d)) == d for every in-range degree.
    std::string to_string() const;

    friend bool operator==(const Degree&, const Degree&) = default;
    friend std::strong_ordering operator<=>(const Degree&, const Degree&) = default;

private:
    std::int64_t units_;
};

inline Degree min(Degree a, Degree b) { return a < b ? a : b; }
inline Degree max(Degree a, Degree b) { return a < b ? b : a; }

}  // namespace contextdl
