#include "fransim/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fransim/analysis.hpp"
#include "fransim/config.hpp"
#include "fransim/errors.hpp"
#include "fransim/interferogram.hpp"
#include "fransim/kinematics.hpp"
#include "fransim/mc_engine.hpp"

namespace fransim {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ';';
    return s;
}

/// --config falls back to FRANSIM_CONFIG so scripted runs can pin a default.
std::string resolve_config_path(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("FRANSIM_CONFIG"); env && *env) return env;
    throw ConfigInvalid("no config given: pass --config or set FRANSIM_CONFIG");
}

CollapseVariant variant_from_name(const std::string& name) {
    if (name == "standard_qm") return CollapseVariant::STANDARD_QM;
    if (name == "suarez_scarani") return CollapseVariant::SUAREZ_SCARANI;
    if (name == "finite_speed") return CollapseVariant::FINITE_SPEED;
    throw ConfigInvalid("unknown model '" + name +
                        "', expected standard_qm, suarez_scarani or finite_speed");
}

ordered_json bound_to_json(const BoundResult& b) {
    return ordered_json{{"frame", b.frame_label},
                        {"distance_m", b.distance_m},
                        {"delay_s", b.delay_s},
                        {"v_min_m_per_s", b.v_min_m_per_s},
                        {"ratio_to_c", b.ratio_to_c}};
}

ordered_json fit_to_json(const FitResult& f) {
    return ordered_json{{"visibility", f.visibility},
                        {"sigma_visibility", f.sigma_visibility},
                        {"amplitude", f.amplitude},
                        {"sigma_amplitude", f.sigma_amplitude},
                        {"baseline", f.baseline},
                        {"sigma_baseline", f.sigma_baseline},
                        {"phase_offset_rad", f.phase_offset_rad},
                        {"sigma_phase_offset", f.sigma_phase_offset},
                        {"bell_threshold_exceeded", f.bell_threshold_exceeded}};
}

ordered_json windows_to_json(const WindowedVisibilityResult& w) {
    ordered_json windows = ordered_json::array();
    for (const auto& win : w.windows) {
        ordered_json j{{"center_ps", win.center_ps}, {"degenerate", win.degenerate}};
        if (!win.degenerate) {
            j["visibility"] = win.visibility;
            j["sigma_visibility"] = win.sigma_visibility;
        }
        if (win.dip_significance) j["dip_significance"] = *win.dip_significance;
        windows.push_back(std::move(j));
    }
    ordered_json j{{"windows", std::move(windows)}};
    if (w.max_dip_significance) {
        j["max_dip_significance"] = *w.max_dip_significance;
        j["best_center_ps"] = *w.best_center_ps;
    }
    return j;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"moving-frame entangled-photon experiment simulator"};
    app.name("fransim");
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a phase scan and write the CSV");
    std::string sim_config, sim_out, sim_model;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    int sim_threads = 1;
    simulate->add_option("--config", sim_config, "config file (default: $FRANSIM_CONFIG)");
    simulate->add_option("--out", sim_out, "output CSV path")->required();
    simulate->add_option("--model", sim_model,
                         "override model variant: standard_qm, suarez_scarani, finite_speed");
    simulate->add_option("--seed", sim_seed, "override scan seed")
        ->each([&](const std::string&) { sim_seed_set = true; });
    simulate->add_option("--threads", sim_threads, "worker threads")->check(CLI::Range(1, 1024));

    // analyze
    auto* analyze = app.add_subcommand("analyze", "fit a CSV and scan for visibility dips");
    std::string an_csv, an_json;
    double an_width = 6.0, an_step = 0.5;
    double an_accidental = -1.0;
    analyze->add_option("csv", an_csv, "interferogram CSV")->required();
    analyze->add_option("--window-width", an_width, "dip scan window width, ps");
    analyze->add_option("--step", an_step, "dip scan step, ps");
    analyze->add_option("--accidental-rate", an_accidental,
                        "override per-bin accidental mean, counts/bin");
    analyze->add_option("--json", an_json, "write the report here instead of stdout");

    // window
    auto* window = app.add_subcommand("window", "frame-disagreement time window for L, v");
    double win_l = 0.0, win_v = 0.0;
    window->add_option("--L", win_l, "baseline, m")->required();
    window->add_option("--v", win_v, "relative frame speed, m/s")->required();

    // bounds
    auto* bounds = app.add_subcommand("bounds", "lower bounds on the influence speed");
    std::string bd_config, bd_label = "lab";
    double bd_distance = 0.0, bd_delay = 0.0, bd_uncertainty = 5e-12;
    bounds->add_option("--distance", bd_distance, "separation, m");
    bounds->add_option("--delay", bd_delay, "timing bound, s");
    bounds->add_option("--label", bd_label, "frame label for the record");
    bounds->add_option("--config", bd_config,
                       "derive lab and dipole-frame bounds from a config");
    bounds->add_option("--timing-uncertainty", bd_uncertainty,
                       "lab timing uncertainty, s (config mode)");

    // classify
    auto* classify = app.add_subcommand("classify", "order a pair of choice events");
    double cl_dt_ps = 0.0, cl_dx = 10600.0, cl_va = 0.0, cl_vb = 0.0;
    classify->add_option("--dt-ps", cl_dt_ps, "t_B - t_A, ps")->required();
    classify->add_option("--dx", cl_dx, "separation along the A->B axis, m");
    classify->add_option("--va", cl_va, "device A velocity along the A->B axis, m/s");
    classify->add_option("--vb", cl_vb, "device B velocity along the A->B axis, m/s");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("fransim");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help and friends
            out << app.help();
            return 0;
        }
        err << "error: usage: " << one_line(e.what()) << "\n";
        return 1;
    }

    if (app.got_subcommand(simulate)) {
        LoadedConfig cfg = load_config(resolve_config_path(sim_config));
        if (!sim_model.empty()) cfg.model.variant = variant_from_name(sim_model);
        if (cfg.model.variant == CollapseVariant::FINITE_SPEED &&
            !cfg.model.influence_speed_m_per_s)
            throw MissingModelParams("model.influence_speed is required for finite_speed");
        if (sim_seed_set) cfg.plan.seed = sim_seed;
        const Interferogram gram = simulate_scan(cfg.experiment, cfg.model, cfg.plan, sim_threads);
        write_interferogram_csv(sim_out, gram);
        return 0;
    }

    if (app.got_subcommand(analyze)) {
        const Interferogram gram = read_interferogram_csv(an_csv);
        std::optional<double> accidental;
        if (analyze->count("--accidental-rate")) accidental = an_accidental;
        const FitResult fit = fit_interferogram(gram, accidental);
        const WindowedVisibilityResult windows = windowed_visibility(gram, an_width, an_step);
        ordered_json report{{"fit", fit_to_json(fit)}};
        report.update(windows_to_json(windows));
        if (an_json.empty()) {
            out << report.dump(2) << "\n";
        } else {
            std::ofstream file(an_json, std::ios::binary);
            if (!file) throw Error("cannot open '" + an_json + "' for writing");
            file << report.dump(2) << "\n";
        }
        return 0;
    }

    if (app.got_subcommand(window)) {
        const double w = before_before_window(win_l, win_v);
        out << ordered_json{{"baseline_m", win_l},
                            {"speed_m_per_s", win_v},
                            {"window_ps", w * 1e12},
                            {"half_window_ps", 0.5 * w * 1e12}}
                   .dump(2)
            << "\n";
        return 0;
    }

    if (app.got_subcommand(bounds)) {
        if (!bd_config.empty()) {
            const LoadedConfig cfg = load_config(bd_config);
            const double baseline_len = cfg.experiment.geometry.baseline_length_m;
            const Vec3 baseline = cfg.experiment.baseline_unit() * baseline_len;
            const auto velocity =
                cbr_lab_velocity_model(cfg.experiment.geometry.lab_latitude_rad, cfg.cbr);
            const double cbr_delay =
                cbr_worst_case_delay(baseline, velocity, bd_uncertainty, cfg.cbr.day_samples);
            out << ordered_json{
                       {"bounds",
                        ordered_json::array(
                            {bound_to_json(speed_bound(baseline_len, bd_uncertainty, "lab")),
                             bound_to_json(speed_bound(baseline_len, cbr_delay, "cbr"))})}}
                       .dump(2)
                << "\n";
            return 0;
        }
        if (bd_distance <= 0.0 || bd_delay <= 0.0)
            throw ConfigInvalid("bounds needs --distance and --delay, or --config");
        out << bound_to_json(speed_bound(bd_distance, bd_delay, bd_label)).dump(2) << "\n";
        return 0;
    }

    if (app.got_subcommand(classify)) {
        const Vec3 axis{1.0, 0.0, 0.0};
        const ChoiceEvent a{{0.0, {0.0, 0.0, 0.0}, "choice_a"}, {axis * cl_va}};
        const ChoiceEvent b{{cl_dt_ps * 1e-12, axis * cl_dx, "choice_b"}, {axis * cl_vb}};
        const PairClass cls = classify_pair(a, b);
        out << ordered_json{{"dt_ps", cl_dt_ps},
                            {"dx_m", cl_dx},
                            {"va_m_per_s", cl_va},
                            {"vb_m_per_s", cl_vb},
                            {"class", to_string(cls)}}
                   .dump(2)
            << "\n";
        return 0;
    }

    throw Error("no subcommand dispatched");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const ParseError& e) {
        err << "error: parse: " << one_line(e.what()) << "\n";
        return 1;
    } catch (const ValidationError& e) {
        err << "error: validation: " << one_line(e.what()) << "\n";
        return 1;
    } catch (const MissingModelParams& e) {
        err << "error: model-params: " << one_line(e.what()) << "\n";
        return 1;
    } catch (const ConfigInvalid& e) {
        err << "error: config: " << one_line(e.what()) << "\n";
        return 1;
    } catch (const FrameSuperluminal& e) {
        err << "error: superluminal-frame: " << one_line(e.what()) << "\n";
        return 2;
    } catch (const AmbiguousOrdering& e) {
        err << "error: ambiguous-ordering: " << one_line(e.what()) << "\n";
        return 2;
    } catch (const FitDegenerate& e) {
        err << "error: fit-degenerate: " << one_line(e.what()) << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: runtime: " << one_line(e.what()) << "\n";
        return 2;
    }
}

}  // namespace fransim
