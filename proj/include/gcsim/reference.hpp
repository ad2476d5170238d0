#pragma once

#include <string>
#include <vector>

namespace gcsim {

/// Piecewise reference signal i_ref(t).
///
/// Each segment takes over at its start time and holds until the next one
/// begins. Ramps hold their final value once complete.
class ReferenceProfile {
public:
    enum class Kind { constant, ramp, sine };

    struct Segment {
        double t_start = 0.0;
        Kind kind = Kind::constant;
        double a = 0.0;  ///< constant: value; ramp: start value; sine: dc offset
        double b = 0.0;  ///< ramp: end value; sine: amplitude
        double c = 0.0;  ///< ramp: duration (s); sine: frequency (Hz)
        double d = 0.0;  ///< sine: phase (rad)
        bool operator==(const Segment&) const = default;
    };

    ReferenceProfile() = default;
    explicit ReferenceProfile(double constant);

    static ReferenceProfile constant(double value) { return ReferenceProfile(value); }
    static ReferenceProfile step(double before, double after, double t_step);
    static ReferenceProfile ramp(double from, double to, double t_start, double duration);
    static ReferenceProfile sine(double offset, double amplitude, double hz, double phase = 0.0);

    ReferenceProfile& then(const Segment& segment);

    [[nodiscard]] double value(double t) const;
    [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }

    /// Text form: segments separated by ';', each "t_start kind args...".
    /// Kinds: "const v", "ramp from to duration", "sine offset amplitude hz [phase]".
    [[nodiscard]] std::string to_string() const;
    static ReferenceProfile parse(const std::string& text);

    bool operator==(const ReferenceProfile&) const = default;

private:
    std::vector<Segment> segments_{Segment{}};
};

}  // namespace gcsim
