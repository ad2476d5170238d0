#include "gcsim/waveform_io.hpp"

#include "gcsim/errors.hpp"
#include "gcsim/format.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace gcsim {

namespace {

std::string header_cell(const std::string& name, const std::string& unit) {
    return name + " [" + unit + "]";
}

void split_header_cell(const std::string& cell, std::string& name, std::string& unit) {
    const auto open = cell.rfind(" [");
    if (open == std::string::npos || cell.empty() || cell.back() != ']') {
        name = cell;
        unit.clear();
        return;
    }
    name = cell.substr(0, open);
    unit = cell.substr(open + 2, cell.size() - open - 3);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

void emit_timeseries(std::ostream& out, const TimeSeries& series, const WaveformOptions& o) {
    if (o.decimation < 1) throw UsageError("emit_timeseries: decimation must be >= 1");
    if (series.empty()) throw ReportingError("emit_timeseries: empty series");
    std::vector<const TimeSeries::Channel*> chosen;
    if (o.channels.empty()) {
        for (const auto& c : series.channels()) chosen.push_back(&c);
    } else {
        for (const auto& name : o.channels) chosen.push_back(&series.channel(name));
    }
    out << header_cell("time", "s");
    for (const auto* c : chosen) out << ',' << header_cell(c->name, c->unit);
    out << '\n';
    const auto& t = series.time();
    for (std::size_t k = 0; k < t.size(); k += static_cast<std::size_t>(o.decimation)) {
        out << format_double(t[k]);
        for (const auto* c : chosen) out << ',' << format_double(c->values[k]);
        out << '\n';
    }
    if (!out) throw IoError("emit_timeseries: write failed");
}

void write_timeseries(const std::string& path, const TimeSeries& series, const WaveformOptions& o) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    emit_timeseries(out, series, o);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

TimeSeries read_timeseries(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("waveform: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    std::string name;
    std::string unit;
    split_header_cell(header.at(0), name, unit);
    if (name != "time") throw IoError("waveform: first column must be time");
    std::vector<std::string> names;
    std::vector<std::string> units;
    for (std::size_t k = 1; k < header.size(); ++k) {
        split_header_cell(header[k], name, unit);
        names.push_back(name);
        units.push_back(unit);
    }
    TimeSeries ts(names, units);
    int line_no = 1;
    std::vector<double> sample(names.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != header.size()) {
            throw IoError("waveform line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " values, got " +
                          std::to_string(cells.size()));
        }
        try {
            const double t = parse_double(cells[0]);
            for (std::size_t k = 1; k < cells.size(); ++k) sample[k - 1] = parse_double(cells[k]);
            ts.append(t, sample);
        } catch (const ConfigError& e) {
            throw IoError("waveform line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ts;
}

TimeSeries read_timeseries_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read waveform file '" + path + "'");
    return read_timeseries(in);
}

}  // namespace gcsim
