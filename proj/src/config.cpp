#include "gcsim/config.hpp"

#include "gcsim/errors.hpp"
#include "gcsim/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace gcsim {

namespace {

using Check = std::function<const char*(double)>;

const Check any = [](double) -> const char* { return nullptr; };
const Check positive = [](double v) -> const char* { return v > 0.0 ? nullptr : "must be positive"; };
const Check non_negative = [](double v) -> const char* {
    return v >= 0.0 ? nullptr : "must not be negative";
};
const Check at_least_one = [](double v) -> const char* { return v >= 1.0 ? nullptr : "must be >= 1"; };

struct Binding {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    bool quoted = false;
};

template <class Ref>
Binding real(const char* section, const char* key, Ref ref, Check check) {
    return {section, key,
            [=](RunConfig& c, const std::string& text) {
                const std::string path = std::string(section) + "." + key;
                double v = 0.0;
                try {
                    v = parse_double(text);
                } catch (const ConfigError&) {
                    throw ConfigError("expected a number, got '" + text + "'", path);
                }
                if (!std::isfinite(v)) throw ConfigError("must be finite", path);
                if (const char* why = check(v)) throw ConfigError(why, path);
                ref(c) = v;
            },
            [=](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); }};
}

int parse_int(const std::string& text, const std::string& path) {
    int v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
        throw ConfigError("expected an integer, got '" + text + "'", path);
    }
    return v;
}

template <class Ref>
Binding integer(const char* section, const char* key, Ref ref, int min) {
    return {section, key,
            [=](RunConfig& c, const std::string& text) {
                const std::string path = std::string(section) + "." + key;
                const int v = parse_int(text, path);
                if (v < min) throw ConfigError("must be >= " + std::to_string(min), path);
                ref(c) = v;
            },
            [=](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Binding boolean(const char* section, const char* key, Ref ref) {
    return {section, key,
            [=](RunConfig& c, const std::string& text) {
                if (text == "true") {
                    ref(c) = true;
                } else if (text == "false") {
                    ref(c) = false;
                } else {
                    throw ConfigError("expected true or false, got '" + text + "'",
                                      std::string(section) + "." + key);
                }
            },
            [=](const RunConfig& c) -> std::string {
                return ref(const_cast<RunConfig&>(c)) ? "true" : "false";
            }};
}

template <class E, class Ref>
Binding enumeration(const char* section, const char* key, Ref ref,
                    std::vector<std::pair<std::string, E>> names) {
    return {section, key,
            [=](RunConfig& c, const std::string& text) {
                for (const auto& [name, value] : names) {
                    if (name == text) {
                        ref(c) = value;
                        return;
                    }
                }
                std::string allowed;
                for (const auto& n : names) allowed += (allowed.empty() ? "" : ", ") + n.first;
                throw ConfigError("expected one of " + allowed + ", got '" + text + "'",
                                  std::string(section) + "." + key);
            },
            [=](const RunConfig& c) {
                const E v = ref(const_cast<RunConfig&>(c));
                for (const auto& [name, value] : names) {
                    if (value == v) return name;
                }
                return std::string("?");
            }};
}

const std::vector<std::pair<std::string, SourceKind>> source_names{
    {"ideal", SourceKind::ideal}, {"converter", SourceKind::converter}};
const std::vector<std::pair<std::string, Integration>> method_names{
    {"trapezoidal", Integration::trapezoidal}, {"backward_euler", Integration::backward_euler}};

std::vector<Binding> make_bindings() {
    std::vector<Binding> b;
    // cvsr
    b.push_back(integer("cvsr", "n_ac", [](RunConfig& c) -> int& { return c.cvsr.n_ac; }, 1));
    b.push_back(integer("cvsr", "n_dc", [](RunConfig& c) -> int& { return c.cvsr.n_dc; }, 1));
    b.push_back(real("cvsr", "source_rms", [](RunConfig& c) -> double& { return c.cvsr.source_rms; }, non_negative));
    b.push_back(real("cvsr", "system_hz", [](RunConfig& c) -> double& { return c.cvsr.system_hz; }, positive));
    b.push_back(real("cvsr", "load_ohms", [](RunConfig& c) -> double& { return c.cvsr.load_ohms; }, positive));
    b.push_back(real("cvsr", "load_henries", [](RunConfig& c) -> double& { return c.cvsr.load_henries; }, positive));
    b.push_back(real("cvsr", "fringing_factor", [](RunConfig& c) -> double& { return c.cvsr.fringing_factor; }, at_least_one));
    b.push_back(real("cvsr", "r_mag_mid", [](RunConfig& c) -> double& { return c.cvsr.r_mag_mid; }, non_negative));
    b.push_back(real("cvsr", "r_mag_outer", [](RunConfig& c) -> double& { return c.cvsr.r_mag_outer; }, non_negative));
    b.push_back({"cvsr", "dc_polarity",
                 [](RunConfig& c, const std::string& text) {
                     const int v = parse_int(text, "cvsr.dc_polarity");
                     if (v != 1 && v != -1) throw ConfigError("must be 1 or -1", "cvsr.dc_polarity");
                     c.cvsr.dc_polarity = v;
                 },
                 [](const RunConfig& c) { return std::to_string(c.cvsr.dc_polarity); }});
    b.push_back(boolean("cvsr", "linear_core", [](RunConfig& c) -> bool& { return c.cvsr.linear_core; }));
    b.push_back(real("cvsr", "l_mid", [](RunConfig& c) -> double& { return c.cvsr.geometry.l_mid; }, positive));
    b.push_back(real("cvsr", "l_out", [](RunConfig& c) -> double& { return c.cvsr.geometry.l_out; }, positive));
    b.push_back(real("cvsr", "h_gap", [](RunConfig& c) -> double& { return c.cvsr.geometry.h_gap; }, positive));
    b.push_back(real("cvsr", "area", [](RunConfig& c) -> double& { return c.cvsr.geometry.area; }, positive));
    // material
    b.push_back(real("material", "mu_r_linear", [](RunConfig& c) -> double& { return c.cvsr.material.mu_r_linear; }, at_least_one));
    b.push_back(real("material", "b_sat", [](RunConfig& c) -> double& { return c.cvsr.material.b_sat; }, positive));
    b.push_back(real("material", "mu_r_sat", [](RunConfig& c) -> double& { return c.cvsr.material.mu_r_sat; }, at_least_one));
    b.push_back(real("material", "knee_sharpness", [](RunConfig& c) -> double& { return c.cvsr.material.knee_sharpness; }, positive));
    // solver
    b.push_back(real("solver", "dt", [](RunConfig& c) -> double& { return c.solver.dt; }, positive));
    b.push_back(real("solver", "newton_tol", [](RunConfig& c) -> double& { return c.solver.newton_tol; }, positive));
    b.push_back(integer("solver", "newton_max_iter", [](RunConfig& c) -> int& { return c.solver.newton_max_iter; }, 1));
    b.push_back(integer("solver", "max_switch_resolution_passes",
                        [](RunConfig& c) -> int& { return c.solver.max_switch_resolution_passes; }, 1));
    b.push_back(enumeration<Integration>("solver", "method", [](RunConfig& c) -> Integration& { return c.solver.method; }, method_names));
    b.push_back(boolean("solver", "damped_restart", [](RunConfig& c) -> bool& { return c.solver.damped_restart; }));
    // source
    b.push_back(real("source", "ac_rms", [](RunConfig& c) -> double& { return c.converter.ac_rms; }, positive));
    b.push_back(real("source", "ac_hz", [](RunConfig& c) -> double& { return c.converter.ac_hz; }, positive));
    b.push_back(real("source", "link_farads", [](RunConfig& c) -> double& { return c.converter.link_farads; }, positive));
    b.push_back(real("source", "carrier_hz", [](RunConfig& c) -> double& { return c.converter.carrier_hz; }, positive));
    b.push_back(real("source", "sample_hz", [](RunConfig& c) -> double& { return c.converter.sample_hz; }, positive));
    b.push_back(real("source", "sensor_gain", [](RunConfig& c) -> double& { return c.converter.sensor_gain; }, positive));
    b.push_back(real("source", "kp", [](RunConfig& c) -> double& { return c.converter.kp; }, non_negative));
    b.push_back(real("source", "ki", [](RunConfig& c) -> double& { return c.converter.ki; }, non_negative));
    b.push_back(boolean("source", "anti_windup", [](RunConfig& c) -> bool& { return c.converter.anti_windup; }));
    b.push_back({"source", "fixed_duty",
                 [](RunConfig& c, const std::string& text) {
                     if (text == "none") {
                         c.converter.fixed_duty.reset();
                         return;
                     }
                     double v = 0.0;
                     try {
                         v = parse_double(text);
                     } catch (const ConfigError&) {
                         throw ConfigError("expected none or a number, got '" + text + "'", "source.fixed_duty");
                     }
                     if (!(std::abs(v) <= 1.0)) throw ConfigError("must lie in [-1, 1]", "source.fixed_duty");
                     c.converter.fixed_duty = v;
                 },
                 [](const RunConfig& c) {
                     return c.converter.fixed_duty ? format_double(*c.converter.fixed_duty) : std::string("none");
                 }});
    b.push_back(real("source", "switch_r_on", [](RunConfig& c) -> double& { return c.converter.bridge_switch.r_on; }, positive));
    b.push_back(real("source", "switch_g_off", [](RunConfig& c) -> double& { return c.converter.bridge_switch.g_off; }, non_negative));
    b.push_back(real("source", "diode_r_on", [](RunConfig& c) -> double& { return c.converter.rectifier_diode.r_on; }, positive));
    b.push_back(real("source", "diode_g_off", [](RunConfig& c) -> double& { return c.converter.rectifier_diode.g_off; }, non_negative));
    b.push_back(real("source", "diode_v_threshold", [](RunConfig& c) -> double& { return c.converter.rectifier_diode.v_threshold; }, non_negative));
    // scenario
    b.push_back(enumeration<SourceKind>("scenario", "source", [](RunConfig& c) -> SourceKind& { return c.source; }, source_names));
    b.push_back(real("scenario", "dc_setpoint", [](RunConfig& c) -> double& { return c.dc_setpoint; }, any));
    Binding profile{"scenario", "dc_profile",
                    [](RunConfig& c, const std::string& text) {
                        if (text == "none") {
                            c.dc_profile.reset();
                            return;
                        }
                        try {
                            c.dc_profile = ReferenceProfile::parse(text);
                        } catch (const Error& e) {
                            throw ConfigError(e.what(), "scenario.dc_profile");
                        }
                    },
                    [](const RunConfig& c) {
                        return c.dc_profile ? c.dc_profile->to_string() : std::string("none");
                    },
                    true};
    b.push_back(profile);
    b.push_back(real("scenario", "duration", [](RunConfig& c) -> double& { return c.duration; }, positive));
    b.push_back(real("scenario", "startup", [](RunConfig& c) -> double& { return c.startup; }, non_negative));
    b.push_back(integer("scenario", "cycles", [](RunConfig& c) -> int& { return c.cycles; }, 1));
    b.push_back(real("scenario", "dc_tail", [](RunConfig& c) -> double& { return c.dc_tail; }, positive));
    b.push_back(boolean("scenario", "calibrate", [](RunConfig& c) -> bool& { return c.calibrate; }));
    b.push_back(real("scenario", "calibration_target", [](RunConfig& c) -> double& { return c.calibration_target; }, positive));
    // output
    b.push_back({"output", "directory",
                 [](RunConfig& c, const std::string& text) { c.output.directory = text; },
                 [](const RunConfig& c) { return c.output.directory; }, true});
    b.push_back({"output", "channels",
                 [](RunConfig& c, const std::string& text) {
                     c.output.channels.clear();
                     std::stringstream in(text);
                     std::string item;
                     while (std::getline(in, item, ',')) {
                         const auto first = item.find_first_not_of(" \t");
                         if (first == std::string::npos) {
                             throw ConfigError("empty channel name", "output.channels");
                         }
                         const auto last = item.find_last_not_of(" \t");
                         c.output.channels.push_back(item.substr(first, last - first + 1));
                     }
                 },
                 [](const RunConfig& c) {
                     std::string out;
                     for (const auto& ch : c.output.channels) out += (out.empty() ? "" : ",") + ch;
                     return out;
                 },
                 true});
    b.push_back(integer("output", "decimation", [](RunConfig& c) -> int& { return c.output.decimation; }, 1));
    b.push_back(boolean("output", "plot_data", [](RunConfig& c) -> bool& { return c.output.plot_data; }));
    return b;
}

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> b = make_bindings();
    return b;
}

const std::vector<std::string> section_order{"cvsr", "material", "solver", "source", "scenario", "output"};

bool is_key_char(char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_';
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

/// True when only blanks or a comment follow `pos`.
bool only_comment_left(const std::string& line, std::size_t pos) {
    const auto next = line.find_first_not_of(" \t", pos);
    return next == std::string::npos || line[next] == '#' || line[next] == ';';
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::string section;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    auto col = [](std::size_t pos) { return static_cast<int>(pos) + 1; };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;

        if (line[first] == '[') {
            const auto close = line.find(']', first);
            if (close == std::string::npos) {
                throw ConfigError("expected ']'", line_no, col(line.size()));
            }
            std::string name = line.substr(first + 1, close - first - 1);
            const auto a = name.find_first_not_of(" \t");
            const auto b = name.find_last_not_of(" \t");
            name = a == std::string::npos ? "" : name.substr(a, b - a + 1);
            if (std::find(section_order.begin(), section_order.end(), name) == section_order.end()) {
                throw ConfigError("unknown section '" + name + "'", line_no, col(first + 1));
            }
            if (!only_comment_left(line, close + 1)) {
                throw ConfigError("unexpected text after section header", line_no, col(close + 1));
            }
            section = name;
            continue;
        }

        std::size_t pos = first;
        while (pos < line.size() && is_key_char(line[pos])) ++pos;
        if (pos == first) {
            throw ConfigError("expected a key", line_no, col(first));
        }
        const std::string key = line.substr(first, pos - first);
        const auto eq = line.find_first_not_of(" \t", pos);
        if (eq == std::string::npos || line[eq] != '=') {
            throw ConfigError("expected '=' after '" + key + "'", line_no,
                              col(eq == std::string::npos ? line.size() : eq));
        }
        if (section.empty()) {
            throw ConfigError("key '" + key + "' outside any section", line_no, col(first));
        }
        const std::string path = section + "." + key;
        const auto it = std::find_if(bindings().begin(), bindings().end(), [&](const Binding& b) {
            return b.section == section && b.key == key;
        });
        if (it == bindings().end()) {
            throw ConfigError("unknown key '" + path + "'", line_no, col(first));
        }
        if (!seen.insert(path).second) {
            throw ConfigError("repeated key '" + path + "'", line_no, col(first));
        }

        std::string value;
        std::size_t v = line.find_first_not_of(" \t", eq + 1);
        if (v != std::string::npos && line[v] == '"') {
            std::size_t k = v + 1;
            bool closed = false;
            for (; k < line.size(); ++k) {
                if (line[k] == '\\' && k + 1 < line.size()) {
                    value += line[++k];
                } else if (line[k] == '"') {
                    closed = true;
                    break;
                } else {
                    value += line[k];
                }
            }
            if (!closed) throw ConfigError("unterminated string", line_no, col(v));
            if (!only_comment_left(line, k + 1)) {
                throw ConfigError("unexpected text after string", line_no, col(k + 1));
            }
        } else if (v != std::string::npos) {
            std::size_t end = line.size();
            for (std::size_t k = v; k < line.size(); ++k) {
                if (line[k] == '#' && (line[k - 1] == ' ' || line[k - 1] == '\t')) {
                    end = k;
                    break;
                }
            }
            value = line.substr(v, end - v);
            value.erase(value.find_last_not_of(" \t") + 1);
            if (value.empty()) {
                throw ConfigError("missing value for '" + path + "'", line_no, col(v));
            }
        } else {
            throw ConfigError("missing value for '" + path + "'", line_no, col(line.size()));
        }
        it->set(c, value);
    }

    if (c.source == SourceKind::converter) {
        if (!seen.count("solver.dt")) c.solver.dt = 0.5e-6;
        if (!seen.count("scenario.duration")) c.duration = 0.1;
    }
    auto recheck = [](const char* key, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what(), key);
        }
    };
    recheck("cvsr", [&] { c.cvsr.validate(); });
    recheck("source", [&] { c.converter.validate(); });
    recheck("solver", [&] { c.solver.validate(); });
    return c;
}

std::string to_config_text(const RunConfig& config) {
    std::ostringstream out;
    bool first = true;
    for (const auto& section : section_order) {
        out << (first ? "" : "\n") << "[" << section << "]\n";
        first = false;
        for (const auto& b : bindings()) {
            if (b.section != section) continue;
            const std::string v = b.get(config);
            out << b.key << " = " << (b.quoted ? quote(v) : v) << "\n";
        }
    }
    return out.str();
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

Scenario make_scenario(const RunConfig& c) {
    Scenario s = Scenario::make(c.source, c.dc_setpoint);
    const ReferenceProfile reference =
        c.dc_profile ? *c.dc_profile : ReferenceProfile::constant(c.dc_setpoint);
    s.duration = c.duration;
    s.solver = c.solver;
    s.analysis.startup = c.startup;
    s.analysis.cycles = c.cycles;
    s.analysis.dc_tail = c.dc_tail;
    if (c.source == SourceKind::ideal) {
        s.dc_reference = reference;
    } else {
        s.converter = c.converter;
        s.converter.reference = reference;
        s.analysis.v_bias_frequencies = {c.converter.carrier_hz};
        s.analysis.smoothing_hz = c.converter.carrier_hz;
        const double target = reference.value(c.duration);
        s.analysis.step_target.reset();
        if (target != 0.0) {
            s.analysis.step_target = target;
            s.analysis.step_time = reference.segments().back().t_start;
        }
    }
    return s;
}

std::string resolve_output_directory(const OutputConfig& output) {
    if (!output.directory.empty()) return output.directory;
    if (const char* env = std::getenv("GCSIM_OUTPUT_DIR"); env && *env) return env;
    return "gcsim_out";
}

}  // namespace gcsim
