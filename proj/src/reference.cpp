#include "gcsim/reference.hpp"

#include "gcsim/errors.hpp"
#include "gcsim/format.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gcsim {

ReferenceProfile::ReferenceProfile(double constant)
    : segments_{Segment{0.0, Kind::constant, constant}} {}

ReferenceProfile ReferenceProfile::step(double before, double after, double t_step) {
    ReferenceProfile p(before);
    p.then(Segment{t_step, Kind::constant, after});
    return p;
}

ReferenceProfile ReferenceProfile::ramp(double from, double to, double t_start, double duration) {
    ReferenceProfile p(from);
    p.then(Segment{t_start, Kind::ramp, from, to, duration});
    return p;
}

ReferenceProfile ReferenceProfile::sine(double offset, double amplitude, double hz,
                                        double phase) {
    ReferenceProfile p;
    p.segments_ = {Segment{0.0, Kind::sine, offset, amplitude, hz, phase}};
    return p;
}

ReferenceProfile& ReferenceProfile::then(const Segment& segment) {
    if (!segments_.empty() && segment.t_start < segments_.back().t_start) {
        throw ConstructionError("reference profile: segments must be in time order");
    }
    if (segment.kind == Kind::ramp && !(segment.c > 0.0)) {
        throw ConstructionError("reference profile: ramp duration must be positive");
    }
    segments_.push_back(segment);
    return *this;
}

double ReferenceProfile::value(double t) const {
    const Segment* active = &segments_.front();
    for (const Segment& s : segments_) {
        if (s.t_start <= t) {
            active = &s;
        } else {
            break;
        }
    }
    const double tau = t - active->t_start;
    switch (active->kind) {
        case Kind::constant:
            return active->a;
        case Kind::ramp:
            if (tau <= 0.0) {
                return active->a;
            }
            if (tau >= active->c) {
                return active->b;
            }
            return active->a + (active->b - active->a) * tau / active->c;
        case Kind::sine:
            return active->a +
                   active->b * std::sin(2.0 * std::numbers::pi * active->c * tau + active->d);
    }
    return 0.0;
}

std::string ReferenceProfile::to_string() const {
    std::string out;
    for (const Segment& s : segments_) {
        if (!out.empty()) {
            out += "; ";
        }
        out += format_double(s.t_start);
        switch (s.kind) {
            case Kind::constant:
                out += " const " + format_double(s.a);
                break;
            case Kind::ramp:
                out += " ramp " + format_double(s.a) + " " + format_double(s.b) + " " +
                       format_double(s.c);
                break;
            case Kind::sine:
                out += " sine " + format_double(s.a) + " " + format_double(s.b) + " " +
                       format_double(s.c) + " " + format_double(s.d);
                break;
        }
    }
    return out;
}

ReferenceProfile ReferenceProfile::parse(const std::string& text) {
    ReferenceProfile p;
    p.segments_.clear();
    std::stringstream all(text);
    std::string piece;
    while (std::getline(all, piece, ';')) {
        std::istringstream in(piece);
        std::string t_text;
        std::string kind;
        if (!(in >> t_text)) {
            continue;
        }
        if (!(in >> kind)) {
            throw ConfigError("reference profile: segment '" + piece + "' has no kind");
        }
        std::vector<double> args;
        std::string tok;
        while (in >> tok) {
            args.push_back(parse_double(tok));
        }
        Segment s;
        s.t_start = parse_double(t_text);
        auto need = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi) {
                throw ConfigError("reference profile: wrong argument count in '" + piece + "'");
            }
        };
        if (kind == "const") {
            need(1, 1);
            s.kind = Kind::constant;
            s.a = args[0];
        } else if (kind == "ramp") {
            need(3, 3);
            s.kind = Kind::ramp;
            s.a = args[0];
            s.b = args[1];
            s.c = args[2];
        } else if (kind == "sine") {
            need(3, 4);
            s.kind = Kind::sine;
            s.a = args[0];
            s.b = args[1];
            s.c = args[2];
            s.d = args.size() > 3 ? args[3] : 0.0;
        } else {
            throw ConfigError("reference profile: unknown segment kind '" + kind + "'");
        }
        try {
            p.then(s);
        } catch (const ConstructionError& e) {
            throw ConfigError(e.what());
        }
    }
    if (p.segments_.empty()) {
        throw ConfigError("reference profile: no segments in '" + text + "'");
    }
    return p;
}

}  // namespace gcsim
