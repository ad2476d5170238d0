#include "cli.hpp"

#include "gcsim/config.hpp"
#include "gcsim/errors.hpp"
#include "gcsim/format.hpp"
#include "gcsim/report.hpp"
#include "gcsim/waveform_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace gcsim::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config_path;
    std::string output_dir;
    bool plot_data = false;
    int decimation = 0;
    double target = 0.0;
    double setpoint = 30.0;
    double initial_kp = 0.05;
    double tune_duration = 0.03;
    double noise_fraction = 0.02;
    double sweep_step = 0.25;
    double sweep_max = 30.0;
    unsigned threads = 0;
    std::string waveform;
};

RunConfig load(const Options& o) {
    return o.config_path.empty() ? parse_config("") : load_config(o.config_path);
}

fs::path output_directory(const Options& o, const RunConfig& c) {
    OutputConfig out = c.output;
    if (!o.output_dir.empty()) out.directory = o.output_dir;
    const fs::path dir = resolve_output_directory(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    f.flush();
    if (!f) throw IoError("cannot write '" + path.string() + "'");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void fill_metrics(RunReport& report, const TimeSeries& series, const Metrics& m,
                  const RunConfig& c) {
    report.metrics = metrics_table(m);
    report.windows["steady"] = m.window;
    report.windows["dc_tail"] = tail_window(series.time(), c.dc_tail);
    report.windows["run"] = {series.time().front(), series.time().back()};
}

int cmd_run(const Options& o, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    RunConfig c = load(o);
    if (o.plot_data) c.output.plot_data = true;
    if (o.decimation > 0) c.output.decimation = o.decimation;
    const fs::path dir = output_directory(o, c);

    RunReport report;
    report.command = "run";
    if (c.calibrate) {
        c.cvsr.fringing_factor = calibrate_fringing(c.cvsr, c.calibration_target);
        report.results["fringing_factor"] = c.cvsr.fringing_factor;
        out << "calibrated fringing_factor = " << format_double(c.cvsr.fringing_factor) << "\n";
    }
    report.config_text = to_config_text(c);

    ScenarioResult r = run_scenario(c.cvsr, make_scenario(c));
    add_derived_channels(r.series, c.cvsr);

    const fs::path wave = dir / "waveform.csv";
    write_timeseries(wave.string(), r.series, {c.output.decimation, c.output.channels});
    report.files["waveform"] = wave.string();
    if (c.output.plot_data) {
        for (const auto& fig : plot_figures(c.source, c.dc_setpoint)) {
            const fs::path p = dir / (fig.name + ".csv");
            write_timeseries(p.string(), r.series, {c.output.decimation, fig.channels});
            report.files[fig.name] = p.string();
        }
    }
    fill_metrics(report, r.series, r.metrics, c);
    if (!c.dc_profile) {
        report.checks = acceptance_checks(c.source, c.dc_setpoint, r.metrics, c.cvsr);
    }
    report.wall_seconds = seconds_since(start);
    const fs::path rep = dir / "report.json";
    report.files["report"] = rep.string();
    write_text(rep, to_json(report));

    out << "i_ac_rms = " << format_double(r.metrics.i_ac_rms) << " A\n";
    out << "i_dc_mean = " << format_double(r.metrics.i_dc_mean_tail) << " A\n";
    out << "v_bias_rms = " << format_double(r.metrics.v_bias_rms) << " V\n";
    for (const auto& chk : report.checks) {
        out << (chk.pass ? "PASS " : "FAIL ") << chk.id << "\n";
    }
    out << "wrote " << wave.string() << " and " << rep.string() << "\n";
    return ok;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
    const RunConfig c = load(o);
    const double target = o.target > 0.0 ? o.target : c.calibration_target;
    const double f = calibrate_fringing(c.cvsr, target);
    out << "fringing_factor = " << format_double(f) << "\n";
    return ok;
}

int cmd_tune(const Options& o, std::ostream& out) {
    const RunConfig c = load(o);
    ZnPlantOptions plant;
    plant.setpoint = o.setpoint;
    plant.duration = o.tune_duration;
    plant.dt = c.solver.dt;
    ZnOptions zn;
    zn.noise_floor = o.noise_fraction * std::abs(o.setpoint);
    const ZnResult r = zn_tune(cvsr_proportional_plant(c.cvsr, plant), o.initial_kp, zn);
    out << "# ultimate gain " << format_double(r.ku) << ", period " << format_double(r.tu)
        << " s\n";
    out << "[source]\n";
    out << "kp = " << format_double(r.kp) << "\n";
    out << "ki = " << format_double(r.ki) << "\n";
    return ok;
}

int cmd_analyze(const Options& o, std::ostream& out) {
    const RunConfig c = load(o);
    TimeSeries series = read_timeseries_file(o.waveform);
    if (series.empty()) throw ReportingError("analyze: waveform file has no samples");
    const Scenario s = make_scenario(c);
    const Metrics m = analyze(series, c.cvsr, s.analysis);
    RunReport report;
    report.command = "analyze";
    report.config_text = to_config_text(c);
    fill_metrics(report, series, m, c);
    report.files["waveform"] = o.waveform;
    out << to_json(report);
    return ok;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const RunConfig c = load(o);
    CriticalOptions opt;
    opt.step = o.sweep_step;
    opt.max_current = o.sweep_max;
    opt.threads = o.threads;
    opt.dt = c.source == SourceKind::ideal ? c.solver.dt : opt.dt;
    const double i = find_critical_dc(c.cvsr, opt);
    out << "critical_dc = " << format_double(i) << " A\n";
    return ok;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gyrator-capacitor transient simulator of a saturable reactor", "gcsim"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "Simulate a scenario and write waveforms and a report");
    run->add_option("-c,--config", o.config_path, "Scenario configuration file");
    run->add_option("-o,--output-dir", o.output_dir, "Output directory");
    run->add_flag("--plot-data", o.plot_data, "Also write per-figure channel subsets");
    run->add_option("--decimation", o.decimation, "Keep every n-th sample")->check(CLI::PositiveNumber);

    auto* cal = app.add_subcommand("calibrate", "Fit the gap fringing factor to the 0 A ac current");
    cal->add_option("-c,--config", o.config_path, "Scenario configuration file");
    cal->add_option("--target", o.target, "Target ac current RMS (A)");

    auto* tune = app.add_subcommand("tune-pi", "Ziegler-Nichols tuning of the converter current loop");
    tune->add_option("-c,--config", o.config_path, "Scenario configuration file");
    tune->add_option("--setpoint", o.setpoint, "dc current during the search (A)");
    tune->add_option("--initial-kp", o.initial_kp, "First proportional gain tried")->check(CLI::PositiveNumber);
    tune->add_option("--duration", o.tune_duration, "Simulated time per trial (s)")->check(CLI::PositiveNumber);
    tune->add_option("--noise-floor", o.noise_fraction,
                     "Peak-to-peak counted as settled, fraction of the setpoint");

    auto* an = app.add_subcommand("analyze", "Recompute metrics from a waveform file");
    an->add_option("waveform", o.waveform, "Waveform file written by run")->required();
    an->add_option("-c,--config", o.config_path, "Scenario configuration file");

    auto* sweep = app.add_subcommand("sweep", "Find the smallest dc current that saturates an outer leg");
    sweep->add_option("-c,--config", o.config_path, "Scenario configuration file");
    sweep->add_option("--step", o.sweep_step, "Current grid step (A)")->check(CLI::PositiveNumber);
    sweep->add_option("--max", o.sweep_max, "Largest current tried (A)")->check(CLI::PositiveNumber);
    sweep->add_option("--threads", o.threads, "Worker threads, 0 for all cores");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (*run) return cmd_run(o, out);
        if (*cal) return cmd_calibrate(o, out);
        if (*tune) return cmd_tune(o, out);
        if (*an) return cmd_analyze(o, out);
        if (*sweep) return cmd_sweep(o, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const ConstructionError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const StepFailure& e) {
        err << "solver error: " << e.what() << "\n";
        return solver_error;
    } catch (const NumericalError& e) {
        err << "solver error: " << e.what() << "\n";
        return solver_error;
    } catch (const CalibrationError& e) {
        err << "calibration error: " << e.what() << " (ac RMS " << format_double(e.lo_value())
            << " A and " << format_double(e.hi_value()) << " A at the bounds)\n";
        return calibration_error;
    } catch (const TuningError& e) {
        err << "tuning error: " << e.what() << "\n";
        return tuning_error;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return io_error;
    } catch (const ReportingError& e) {
        err << "analysis error: " << e.what() << "\n";
        return analysis_error;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return usage_error;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return internal_error;
    }
    return usage_error;
}

}  // namespace gcsim::cli
