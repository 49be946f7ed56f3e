#include "qontrol/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <thread>

namespace qontrol {

namespace {

int resolve_workers(int requested) {
#ifdef _OPENMP
    if (requested > 0) {
        return requested;
    }
    return std::max(1, omp_get_max_threads());
#else
    (void)requested;
    return 1;
#endif
}

Trajectory quarter_trajectory(double delta_e_over_E, const SimConfig& cfg,
                              double t_end_over_T = 0.25) {
    const SystemParams p = cfg.params_for(delta_e_over_E);
    return integrate(p, make_grid(p, t_end_over_T, cfg.dt_in_hbar_over_H12),
                     cfg.method, cfg.form, cfg.policy);
}

std::vector<DurationPoint> sweep_impl(std::vector<double> deltas,
                                      std::vector<double> thresholds,
                                      const SimConfig& cfg, bool parallel) {
    if (deltas.empty()) {
        throw std::invalid_argument("sweep needs at least one delta_e value");
    }
    for (double thr : thresholds) {
        if (!(thr > 0.0 && thr <= 1.0)) {
            throw std::invalid_argument("thresholds must lie in (0, 1]");
        }
    }
    std::sort(deltas.begin(), deltas.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());

    const long nd = static_cast<long>(deltas.size());
    const long nt = static_cast<long>(thresholds.size());
    // fractions[d][t], filled per-delta so one trajectory serves all thresholds
    std::vector<double> fractions(nd * nt, 0.0);
    std::vector<std::string> failures(nd);
    bool failed = false;

    const int workers = resolve_workers(cfg.workers);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(parallel ? workers : 1)
#endif
    for (long d = 0; d < nd; ++d) {
        try {
            const Trajectory traj = quarter_trajectory(deltas[d], cfg);
            for (long t = 0; t < nt; ++t) {
                fractions[d * nt + t] = control_duration(traj, thresholds[t]).fraction;
            }
        } catch (const std::exception& e) {
            failures[d] = e.what();
#ifdef _OPENMP
#pragma omp atomic write
#endif
            failed = true;
        }
    }
    if (failed) {
        for (long d = 0; d < nd; ++d) {
            if (!failures[d].empty()) {
                throw std::runtime_error("sweep point delta_e_over_E=" +
                                         std::to_string(deltas[d]) + ": " + failures[d]);
            }
        }
    }

    std::vector<DurationPoint> out;
    out.reserve(nd * nt);
    for (long t = 0; t < nt; ++t) {
        for (long d = 0; d < nd; ++d) {
            out.push_back({deltas[d], thresholds[t], fractions[d * nt + t]});
        }
    }
    return out;
}

}  // namespace

double superlevel_fraction(const Trajectory& traj, double threshold,
                           double window_end_over_T) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("threshold must lie in (0, 1]");
    }
    const double window = window_end_over_T * traj.params.period;
    const double tol = 1e-9 * traj.params.period;
    if (traj.times.size() < 2 || traj.times.front() > tol ||
        traj.times.back() < window - tol) {
        throw TrajectoryTooShortError("trajectory does not cover the requested window");
    }
    if (traj.diverged_at && *traj.diverged_at < window - tol) {
        throw DivergedTrajectoryError("trajectory diverged inside the window at t = " +
                                      std::to_string(*traj.diverged_at));
    }
    double measure = 0.0;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        if (traj.times[k + 1] > window + tol) {
            break;
        }
        const double left = traj.p2_at(k) >= threshold ? 0.5 : 0.0;
        const double right = traj.p2_at(k + 1) >= threshold ? 0.5 : 0.0;
        measure += (traj.times[k + 1] - traj.times[k]) * (left + right);
    }
    return measure / window;
}

DurationPoint control_duration(const Trajectory& traj, double threshold) {
    return {traj.params.delta_e_over_E(), threshold,
            superlevel_fraction(traj, threshold, 0.25)};
}

std::vector<DurationPoint> duration_sweep(const std::vector<double>& delta_e_over_E,
                                          const std::vector<double>& thresholds,
                                          const SimConfig& cfg) {
    return sweep_impl(delta_e_over_E, thresholds, cfg, true);
}

std::vector<DurationPoint> duration_sweep_serial(const std::vector<double>& delta_e_over_E,
                                                 const std::vector<double>& thresholds,
                                                 const SimConfig& cfg) {
    return sweep_impl(delta_e_over_E, thresholds, cfg, false);
}

EffectSeries nondegeneracy_effect(const Trajectory& traj_de, const Trajectory& traj_0) {
    if (traj_0.params.delta_e != 0.0) {
        throw std::invalid_argument("reference trajectory must have delta_e = 0");
    }
    if (traj_de.times.size() != traj_0.times.size()) {
        throw GridMismatchError("trajectories live on different grids");
    }
    const double period = traj_de.params.period;
    const double tol = 1e-12 * period;
    EffectSeries series;
    series.delta_e_over_E = traj_de.params.delta_e_over_E();
    for (std::size_t k = 0; k < traj_de.times.size(); ++k) {
        if (std::abs(traj_de.times[k] - traj_0.times[k]) > tol) {
            throw GridMismatchError("trajectory grids disagree at sample " +
                                    std::to_string(k));
        }
        const double t = traj_de.times[k];
        if (t <= tol || t > 0.25 * period + 1e-9 * period) {
            continue;
        }
        const double p2_ref = traj_0.p2_at(k);
        const double eff = p2_ref < 1e-12
                               ? 0.0
                               : 100.0 * std::abs(traj_de.p2_at(k) - p2_ref) / p2_ref;
        series.times.push_back(t / period);
        series.effect.push_back(eff);
    }
    return series;
}

double scaling_exponent(const std::vector<double>& delta_e_over_E,
                        double t_probe_over_T, const SimConfig& cfg) {
    std::vector<double> deltas = delta_e_over_E;
    std::sort(deltas.begin(), deltas.end());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
    if (deltas.size() < 3) {
        throw std::invalid_argument("scaling fit needs >= 3 distinct delta_e values");
    }
    if (deltas.back() > 0.1 + 1e-12) {
        throw std::invalid_argument("scaling fit is restricted to delta_e <= 0.1 E");
    }
    if (!(t_probe_over_T > 0.0 && t_probe_over_T <= 0.25)) {
        throw std::invalid_argument("t_probe must lie in (0, T/4]");
    }

    // Noise floor: relative step-halving residual of the degenerate run at the
    // probe time, as a percentage.
    const Trajectory ref = quarter_trajectory(0.0, cfg, t_probe_over_T);
    SimConfig half = cfg;
    half.dt_in_hbar_over_H12 = cfg.dt_in_hbar_over_H12 / 2.0;
    const Trajectory ref_half = quarter_trajectory(0.0, half, t_probe_over_T);
    const double p2_ref = ref.amplitudes.back().p2();
    const double noise =
        100.0 * std::abs(p2_ref - ref_half.amplitudes.back().p2()) /
        std::max(p2_ref, 1e-300);

    std::vector<double> log_d, log_e;
    for (double d : deltas) {
        const Trajectory traj = quarter_trajectory(d, cfg, t_probe_over_T);
        const double eff = p2_ref < 1e-12
                               ? 0.0
                               : 100.0 * std::abs(traj.amplitudes.back().p2() - p2_ref) /
                                     p2_ref;
        if (eff < 10.0 * noise) {
            throw EffectBelowNoiseError(
                "effect at delta_e_over_E=" + std::to_string(d) +
                " is below 10x the numerical noise floor (" + std::to_string(noise) +
                "%)");
        }
        log_d.push_back(std::log(d));
        log_e.push_back(std::log(eff));
    }

    const auto n = static_cast<double>(log_d.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_d.size(); ++i) {
        sx += log_d[i];
        sy += log_e[i];
        sxx += log_d[i] * log_d[i];
        sxy += log_d[i] * log_e[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FitResult fit_effect(const EffectSeries& series, FitTimeUnit time_unit,
                     const SystemParams& params, double window_start_over_T,
                     double window_end_over_T) {
    if (series.times.size() < 100 || series.times.back() < 0.25 - 1e-9) {
        throw std::invalid_argument("effect series must cover (0, T/4] with >= 100 samples");
    }
    if (!(window_start_over_T >= 0.0 && window_end_over_T > window_start_over_T)) {
        throw std::invalid_argument("invalid fit window");
    }
    const double d2 = series.delta_e_over_E * series.delta_e_over_E;
    if (!(d2 > 0.0)) {
        throw std::invalid_argument("fit requires a nonzero delta_e series");
    }
    // time scale: fraction of T, or t / (hbar/H12) = fraction * chi0
    const double unit_scale =
        time_unit == FitTimeUnit::fraction_of_T ? 1.0 : params.pulse_area();

    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double t = series.times[k];
        if (t <= window_start_over_T || t > window_end_over_T + 1e-15) {
            continue;
        }
        ts.push_back(t * unit_scale);
        ys.push_back(series.effect[k] / d2);
    }
    if (ts.size() < 3) {
        throw std::invalid_argument("fit window contains fewer than 3 samples");
    }

    Eigen::MatrixXd design(ts.size(), 3);
    Eigen::VectorXd rhs(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t2 = ts[i] * ts[i];
        design(i, 0) = t2;
        design(i, 1) = t2 * ts[i];
        design(i, 2) = t2 * t2;
        rhs(i) = ys[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > smax * 1e-14)) {
        throw std::runtime_error("fit design matrix is rank deficient");
    }
    const Eigen::VectorXd coef = svd.solve(rhs);
    const double rms_residual =
        std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(ts.size()));

    return {coef(0), coef(1), coef(2), rms_residual, time_unit, smax / smin};
}

}  // namespace qontrol
