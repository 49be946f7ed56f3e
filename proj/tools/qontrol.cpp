// qontrol — CLI for the driven two-state simulator: trajectories, control
// duration sweeps, non-degeneracy effect curves, power-series diagnostics,
// and one-command figure datasets.
//
// Exit codes: 0 success, 1 invalid arguments/config, 2 numerical failure
// (divergence/overflow where halting was requested), 3 I/O failure.

#include <CLI11.hpp>

#include "qontrol/analytic.hpp"
#include "qontrol/dynamics.hpp"
#include "qontrol/io.hpp"
#include "qontrol/metrics.hpp"
#include "qontrol/series.hpp"
#include "qontrol/types.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qontrol;

namespace {

struct CliConfig {
    double delta_e{0.0};
    std::vector<double> delta_e_list;
    std::string method{"rk4"};
    std::string form{"first"};
    double dt{1e-5};
    double t_end{1.0};
    std::vector<double> thresholds{0.95, 0.90, 0.80, 0.70};
    int workers{0};
    long stride{1};
    std::string out{"out.csv"};
    double coupling_chi0{pi / 2.0};
    bool halt_on_divergence{false};
    bool fit{false};
    std::string fit_window{"0:0.25"};
    std::string time_unit{"fraction_of_T"};
    bool extended_window{false};
    int order{80};
    bool radius{false};
    bool high_precision{false};
    int which{1};
};

IntegrationMethod parse_method(const std::string& name) {
    if (name == "euler") return IntegrationMethod::euler;
    if (name == "rk4") return IntegrationMethod::rk4;
    throw CLI::ValidationError("--method", "must be euler or rk4");
}

FitTimeUnit parse_time_unit(const std::string& name) {
    if (name == "fraction_of_T") return FitTimeUnit::fraction_of_T;
    if (name == "hbar_over_H12") return FitTimeUnit::hbar_over_H12;
    throw CLI::ValidationError("--time-unit", "must be fraction_of_T or hbar_over_H12");
}

std::pair<double, double> parse_window(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw CLI::ValidationError("--fit-window", "expected <start>:<end>");
    }
    try {
        return {std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--fit-window", "expected numeric <start>:<end>");
    }
}

std::string join_doubles(const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        s += io::format_double(values[i]);
    }
    return s;
}

// In natural units (T = hbar = 1) the coupling energy H12 equals chi0.
SystemParams params_from(const CliConfig& cfg, double delta_e_over_E) {
    return make_params(1.0, delta_e_over_E, cfg.coupling_chi0);
}

SimConfig sim_config(const CliConfig& cfg) {
    SimConfig sim;
    sim.method = parse_method(cfg.method);
    sim.form = cfg.form == "second" ? EquationForm::second_order
                                    : EquationForm::first_order;
    sim.dt_in_hbar_over_H12 = cfg.dt;
    sim.policy.halt_on_divergence = cfg.halt_on_divergence;
    sim.coupling_override = cfg.coupling_chi0;
    sim.workers = cfg.workers;
    return sim;
}

// Convention lines echoed into every manifest: the drive is calibrated so the
// accumulated pulse area over [0,t] is (H12*T/hbar)*sin(2*pi*t/T) (complete
// transfer at T/4 when H12*T/hbar = pi/2; the bare matrix-element rate
// H12/hbar*cos(2*pi*t/T) would accumulate 1/(2*pi) of that area), and the
// splitting enters as a symmetric diagonal pair ∓delta_e.
void append_conventions(std::vector<std::pair<std::string, std::string>>& m) {
    m.emplace_back("drive_rate", "(2*pi/T)*(H12*T/hbar)*cos(2*pi*t/T)");
    m.emplace_back("drive_pulse_area", "(H12*T/hbar)*sin(2*pi*t/T)");
    m.emplace_back("bare_rate_area_ratio", "2*pi");
    m.emplace_back("detuning_rate", "2*delta_e/hbar (symmetric -/+delta_e splitting)");
}

std::vector<std::pair<std::string, std::string>> base_manifest(const CliConfig& cfg,
                                                               const std::string& command) {
    std::vector<std::pair<std::string, std::string>> m;
    m.emplace_back("command", command);
    m.emplace_back("delta_e_over_E", io::format_double(cfg.delta_e));
    m.emplace_back("delta_e_list", join_doubles(cfg.delta_e_list));
    m.emplace_back("method", cfg.method);
    m.emplace_back("form", cfg.form);
    m.emplace_back("dt_in_hbar_over_H12", io::format_double(cfg.dt));
    m.emplace_back("t_end_over_T", io::format_double(cfg.t_end));
    m.emplace_back("thresholds", join_doubles(cfg.thresholds));
    m.emplace_back("workers", std::to_string(cfg.workers));
    m.emplace_back("stride", std::to_string(cfg.stride));
    m.emplace_back("coupling_chi0", io::format_double(cfg.coupling_chi0));
    m.emplace_back("halt_on_divergence", cfg.halt_on_divergence ? "1" : "0");
    m.emplace_back("fit", cfg.fit ? "1" : "0");
    m.emplace_back("fit_window", cfg.fit_window);
    m.emplace_back("time_unit", cfg.time_unit);
    m.emplace_back("extended_window", cfg.extended_window ? "1" : "0");
    m.emplace_back("order", std::to_string(cfg.order));
    m.emplace_back("radius", cfg.radius ? "1" : "0");
    m.emplace_back("high_precision", cfg.high_precision ? "1" : "0");
    m.emplace_back("out", cfg.out);
    append_conventions(m);
    return m;
}

void write_manifest(const fs::path& target,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    io::write_text_atomic(target, io::manifest_text(entries));
}

std::string trajectory_csv(const Trajectory& traj, long stride) {
    const double period = traj.params.period;
    std::string csv = "t_over_T,re_a11,im_a11,re_a12,im_a12,p1,p2,defect\n";
    const std::size_t last = traj.size() - 1;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (stride > 1 && k % static_cast<std::size_t>(stride) != 0 && k != last) {
            continue;
        }
        const auto& a = traj.amplitudes[k];
        csv += io::csv_row({io::format_double(traj.times[k] / period),
                            io::format_double(a.a11.real()), io::format_double(a.a11.imag()),
                            io::format_double(a.a12.real()), io::format_double(a.a12.imag()),
                            io::format_double(a.p1()), io::format_double(a.p2()),
                            io::format_double(traj.unitarity_defect[k])});
    }
    return csv;
}

Trajectory analytic_trajectory(const SystemParams& p, const TimeGrid& grid) {
    Trajectory traj;
    traj.params = p;
    const long n = grid.n_steps();
    traj.times.reserve(n + 1);
    traj.amplitudes.reserve(n + 1);
    traj.unitarity_defect.reserve(n + 1);
    for (long k = 0; k <= n; ++k) {
        const double t = grid.time_at(k);
        traj.times.push_back(t);
        traj.amplitudes.push_back(degenerate_amplitudes(p, t));
        traj.unitarity_defect.push_back(traj.amplitudes.back().unitarity_defect());
    }
    return traj;
}

// ------------------------------- commands ------------------------------------

int cmd_traj(const CliConfig& cfg) {
    const SystemParams p = params_from(cfg, cfg.delta_e);
    const TimeGrid grid = make_grid(p, cfg.t_end, cfg.dt);
    auto manifest = base_manifest(cfg, "traj");

    Trajectory traj;
    int exit_code = 0;
    if (cfg.form == "analytic") {
        traj = analytic_trajectory(p, grid);
    } else {
        const SimConfig sim = sim_config(cfg);
        try {
            traj = integrate(p, grid, sim.method, sim.form, sim.policy);
        } catch (const DivergenceError& e) {
            traj = e.partial;
            exit_code = 2;
        }
    }
    if (traj.diverged_at) {
        manifest.emplace_back("diverged_at_over_T",
                              io::format_double(*traj.diverged_at / p.period));
    }
    io::write_text_atomic(cfg.out, trajectory_csv(traj, cfg.stride));
    write_manifest(cfg.out + ".manifest", manifest);
    if (exit_code != 0) {
        std::cerr << "qontrol: trajectory diverged at t/T = "
                  << io::format_double(*traj.diverged_at / p.period) << "\n";
    }
    return exit_code;
}

int cmd_sweep(const CliConfig& cfg) {
    if (cfg.delta_e_list.empty()) {
        throw std::invalid_argument("sweep requires --delta-e-list");
    }
    const SimConfig sim = sim_config(cfg);
    auto manifest = base_manifest(cfg, "sweep");

    std::string csv;
    if (!cfg.extended_window) {
        const auto points = duration_sweep(cfg.delta_e_list, cfg.thresholds, sim);
        csv = "delta_e_over_E,threshold,fraction\n";
        for (const auto& pt : points) {
            csv += io::csv_row({io::format_double(pt.delta_e_over_E),
                                io::format_double(pt.threshold),
                                io::format_double(pt.fraction)});
        }
    } else {
        // Extended report: quarter-period fraction plus the same measure over
        // [0, T/2] (the half-period reading of the duration definition).
        std::vector<double> deltas = cfg.delta_e_list;
        std::vector<double> thresholds = cfg.thresholds;
        std::sort(deltas.begin(), deltas.end());
        std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
        const long nd = static_cast<long>(deltas.size());
        const long nt = static_cast<long>(thresholds.size());
        std::vector<double> quarter(nd * nt), half(nd * nt);
        std::vector<std::string> failures(nd);
        bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) \
    num_threads(sim.workers > 0 ? sim.workers : omp_get_max_threads())
#endif
        for (long d = 0; d < nd; ++d) {
            try {
                const SystemParams p = sim.params_for(deltas[d]);
                const Trajectory traj =
                    integrate(p, make_grid(p, 0.5, sim.dt_in_hbar_over_H12), sim.method,
                              sim.form, sim.policy);
                for (long t = 0; t < nt; ++t) {
                    quarter[d * nt + t] = superlevel_fraction(traj, thresholds[t], 0.25);
                    half[d * nt + t] = superlevel_fraction(traj, thresholds[t], 0.5);
                }
            } catch (const std::exception& e) {
                failures[d] = e.what();
                failed = true;
            }
        }
        if (failed) {
            for (long d = 0; d < nd; ++d) {
                if (!failures[d].empty()) {
                    throw std::runtime_error("sweep point delta_e_over_E=" +
                                             io::format_double(deltas[d]) + ": " +
                                             failures[d]);
                }
            }
        }
        csv = "delta_e_over_E,threshold,fraction,fraction_half_period\n";
        for (long t = 0; t < nt; ++t) {
            for (long d = 0; d < nd; ++d) {
                csv += io::csv_row({io::format_double(deltas[d]),
                                    io::format_double(thresholds[t]),
                                    io::format_double(quarter[d * nt + t]),
                                    io::format_double(half[d * nt + t])});
            }
        }
    }
    io::write_text_atomic(cfg.out, csv);
    write_manifest(cfg.out + ".manifest", manifest);
    return 0;
}

EffectSeries effect_series_for(const CliConfig& cfg, const SimConfig& sim) {
    const SystemParams p_de = sim.params_for(cfg.delta_e);
    const SystemParams p_0 = sim.params_for(0.0);
    const TimeGrid grid = make_grid(p_de, 0.25, sim.dt_in_hbar_over_H12);
    const Trajectory traj_de = integrate(p_de, grid, sim.method, sim.form, sim.policy);
    const Trajectory traj_0 = integrate(p_0, grid, sim.method, sim.form, sim.policy);
    return nondegeneracy_effect(traj_de, traj_0);
}

int cmd_effect(const CliConfig& cfg) {
    const SimConfig sim = sim_config(cfg);
    auto manifest = base_manifest(cfg, "effect");
    const EffectSeries series = effect_series_for(cfg, sim);

    std::string csv = "t_over_T,effect_percent\n";
    const std::size_t last = series.times.size() - 1;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        if (cfg.stride > 1 && k % static_cast<std::size_t>(cfg.stride) != 0 && k != last) {
            continue;
        }
        csv += io::csv_row(
            {io::format_double(series.times[k]), io::format_double(series.effect[k])});
    }
    if (cfg.fit) {
        const auto [w0, w1] = parse_window(cfg.fit_window);
        const FitResult fit = fit_effect(series, parse_time_unit(cfg.time_unit),
                                         sim.params_for(cfg.delta_e), w0, w1);
        const std::vector<std::pair<std::string, std::string>> block = {
            {"c1", io::format_double(fit.c1)},
            {"c2", io::format_double(fit.c2)},
            {"c3", io::format_double(fit.c3)},
            {"residual", io::format_double(fit.residual_norm)},
            {"time_unit", cfg.time_unit},
            {"condition_number", io::format_double(fit.condition_number)},
        };
        csv += io::manifest_text(block);
        for (const auto& kv : block) {
            manifest.emplace_back("fit_" + kv.first, kv.second);
        }
    }
    io::write_text_atomic(cfg.out, csv);
    write_manifest(cfg.out + ".manifest", manifest);
    return 0;
}

int cmd_series(const CliConfig& cfg) {
    if (cfg.radius && cfg.order < 20) {
        throw std::invalid_argument("radius estimation requires --order >= 20");
    }
    const SystemParams p = params_from(cfg, cfg.delta_e);
    const SeriesPrecision precision = cfg.high_precision ? SeriesPrecision::extended
                                                         : SeriesPrecision::automatic;
    const SeriesSolution sol = taylor_coefficients(p, cfg.order, precision);

    std::string csv = "n,re_alpha,im_alpha,re_beta,im_beta\n";
    for (int n = 0; n <= sol.order; ++n) {
        csv += io::csv_row({std::to_string(n),
                            io::format_double(sol.coeffs_a11[n].real()),
                            io::format_double(sol.coeffs_a11[n].imag()),
                            io::format_double(sol.coeffs_a12[n].real()),
                            io::format_double(sol.coeffs_a12[n].imag())});
    }
    io::write_text_atomic(cfg.out, csv);

    auto manifest = base_manifest(cfg, "series");
    if (cfg.radius) {
        const double r = sol.radius_estimate / p.period;
        const std::string report =
            std::isinf(r) ? "inf" : io::format_double(r);
        std::cout << "radius_over_T=" << report << "\n";
        manifest.emplace_back("radius_over_T", report);
    }
    write_manifest(cfg.out + ".manifest", manifest);
    return 0;
}

std::string two_column_csv(const std::string& header, const std::vector<double>& x,
                           const std::vector<double>& y, long stride) {
    std::string csv = header + "\n";
    const std::size_t last = x.size() - 1;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (stride > 1 && k % static_cast<std::size_t>(stride) != 0 && k != last) {
            continue;
        }
        csv += io::csv_row({io::format_double(x[k]), io::format_double(y[k])});
    }
    return csv;
}

int cmd_figure(const CliConfig& cfg) {
    const fs::path dir = cfg.out;
    fs::create_directories(dir);
    CliConfig fig = cfg;  // canonical settings per figure, defaults elsewhere
    auto manifest = base_manifest(cfg, "figure" + std::to_string(cfg.which));

    if (cfg.which == 1) {
        const SystemParams p = params_from(cfg, 0.0);
        const TimeGrid grid = make_grid(p, 1.0, cfg.dt);
        const Trajectory traj =
            integrate(p, grid, IntegrationMethod::rk4, EquationForm::first_order, {});
        io::write_text_atomic(dir / "figure1_traj.csv", trajectory_csv(traj, 1));
        std::vector<double> t, p1, p2, sum;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            t.push_back(traj.times[k] / p.period);
            p1.push_back(traj.p1_at(k));
            p2.push_back(traj.p2_at(k));
            sum.push_back(traj.p1_at(k) + traj.p2_at(k));
        }
        const long stride = 100;
        io::write_text_atomic(dir / "figure1_p1.csv",
                              two_column_csv("t_over_T,p1", t, p1, stride));
        io::write_text_atomic(dir / "figure1_p2.csv",
                              two_column_csv("t_over_T,p2", t, p2, stride));
        io::write_text_atomic(dir / "figure1_sum.csv",
                              two_column_csv("t_over_T,p1_plus_p2", t, sum, stride));
    } else if (cfg.which == 2) {
        fig.delta_e_list.clear();
        for (int i = 0; i <= 20; ++i) {
            fig.delta_e_list.push_back(0.05 * i);
        }
        fig.thresholds = {0.95, 0.90, 0.80, 0.70};
        const SimConfig sim = sim_config(fig);
        const auto points = duration_sweep(fig.delta_e_list, fig.thresholds, sim);
        std::string csv = "delta_e_over_E,threshold,fraction\n";
        for (const auto& pt : points) {
            csv += io::csv_row({io::format_double(pt.delta_e_over_E),
                                io::format_double(pt.threshold),
                                io::format_double(pt.fraction)});
        }
        io::write_text_atomic(dir / "figure2_sweep.csv", csv);
        for (double thr : fig.thresholds) {
            std::vector<double> xs, ys;
            for (const auto& pt : points) {
                if (pt.threshold == thr) {
                    xs.push_back(pt.delta_e_over_E);
                    ys.push_back(pt.fraction);
                }
            }
            const std::string name =
                "figure2_thr" + std::to_string(static_cast<int>(std::lround(thr * 100))) +
                ".csv";
            io::write_text_atomic(dir / name,
                                  two_column_csv("delta_e_over_E,fraction", xs, ys, 1));
        }
    } else if (cfg.which == 3) {
        fig.delta_e = 0.1;
        const SimConfig sim = sim_config(fig);
        const EffectSeries series = effect_series_for(fig, sim);
        io::write_text_atomic(
            dir / "figure3_effect.csv",
            two_column_csv("t_over_T,effect_percent", series.times, series.effect, 1));
        // Numerical-error curve: pointwise |p2(dt) - p2(dt/2)| of the
        // degenerate run, on the coarse grid.
        const SystemParams p0 = sim.params_for(0.0);
        const Trajectory coarse = integrate(p0, make_grid(p0, 0.25, cfg.dt),
                                            sim.method, sim.form, sim.policy);
        const Trajectory fine = integrate(p0, make_grid(p0, 0.25, cfg.dt / 2.0),
                                          sim.method, sim.form, sim.policy);
        std::vector<double> t, err;
        for (std::size_t k = 0; k < coarse.size(); ++k) {
            t.push_back(coarse.times[k] / p0.period);
            err.push_back(std::abs(coarse.p2_at(k) - fine.p2_at(2 * k)));
        }
        io::write_text_atomic(dir / "figure3_error.csv",
                              two_column_csv("t_over_T,p2_step_halving_error", t, err, 1));
    } else {
        throw std::invalid_argument("figure index must be 1, 2, or 3");
    }
    write_manifest(dir / "run_manifest.txt", manifest);
    return 0;
}

int classify_and_report(const std::exception& e) {
    std::cerr << "qontrol: " << e.what() << "\n";
    if (dynamic_cast<const std::ios_base::failure*>(&e) ||
        dynamic_cast<const fs::filesystem_error*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const DivergenceError*>(&e) ||
        dynamic_cast<const TanGuardError*>(&e) ||
        dynamic_cast<const SeriesOverflowError*>(&e) ||
        dynamic_cast<const EvaluationOverflowError*>(&e) ||
        dynamic_cast<const EffectBelowNoiseError*>(&e)) {
        return 2;
    }
    if (dynamic_cast<const std::invalid_argument*>(&e)) {
        return 1;
    }
    // sweep-point failures wrap divergence-type errors
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven two-state (qubit) population-transfer simulator"};
    app.fallthrough();
    app.set_config("--config")->configurable(false);

    CliConfig cfg;
    app.add_option("--delta-e", cfg.delta_e, "level splitting as a fraction of E")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--delta-e-list", cfg.delta_e_list,
                   "comma-separated splittings (fractions of E)")
        ->delimiter(',');
    app.add_option("--method", cfg.method, "euler | rk4")
        ->check(CLI::IsMember({"euler", "rk4"}));
    app.add_option("--form", cfg.form, "first | second | analytic")
        ->check(CLI::IsMember({"first", "second", "analytic"}));
    app.add_option("--dt", cfg.dt, "step size in units of hbar/H12")
        ->check(CLI::PositiveNumber);
    app.add_option("--t-end", cfg.t_end, "end time as a fraction of T")
        ->check(CLI::PositiveNumber);
    app.add_option("--thresholds", cfg.thresholds, "population-transfer levels in (0,1]")
        ->delimiter(',');
    app.add_option("--workers", cfg.workers, "sweep worker count (default: all cores)")
        ->envname("QONTROL_WORKERS");
    app.add_option("--stride", cfg.stride, "CSV row thinning factor")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", cfg.out, "output file (directory for figure)");
    app.add_option("--coupling", cfg.coupling_chi0,
                   "coupling as H12*T/hbar (default pi/2, the control condition)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--halt-on-divergence", cfg.halt_on_divergence,
                 "exit 2 when the unitarity defect crosses threshold");
    app.add_flag("--fit", cfg.fit, "append the polynomial fit block (effect)");
    app.add_option("--fit-window", cfg.fit_window, "fit window start:end (fractions of T)");
    app.add_option("--time-unit", cfg.time_unit, "fraction_of_T | hbar_over_H12")
        ->check(CLI::IsMember({"fraction_of_T", "hbar_over_H12"}));
    app.add_flag("--extended-window", cfg.extended_window,
                 "sweep: also report the half-period fraction column");
    app.add_option("--order", cfg.order, "series truncation order")
        ->check(CLI::PositiveNumber);
    app.add_flag("--radius", cfg.radius, "series: report the convergence-radius estimate");
    app.add_flag("--high-precision", cfg.high_precision,
                 "series: force 50-digit coefficient generation");

    auto* traj = app.add_subcommand("traj", "trajectory CSV over [0, t_end]");
    auto* sweep = app.add_subcommand("sweep", "control-duration sweep CSV");
    auto* effect = app.add_subcommand("effect", "non-degeneracy effect CSV");
    auto* series = app.add_subcommand("series", "power-series coefficient CSV");
    auto* figure = app.add_subcommand("figure", "canonical figure datasets");
    figure->add_option("which", cfg.which, "figure index (1, 2, or 3)")
        ->check(CLI::Range(1, 3));
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (traj->parsed()) return cmd_traj(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (effect->parsed()) return cmd_effect(cfg);
        if (series->parsed()) return cmd_series(cfg);
        if (figure->parsed()) return cmd_figure(cfg);
    } catch (const std::exception& e) {
        return classify_and_report(e);
    }
    return 1;
}
