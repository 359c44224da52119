#include "fransim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "fransim/errors.hpp"

namespace fransim {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct RawEntry {
    std::string value;
    int line = 0;
    int key_col = 0;
    int value_col = 0;
    bool used = false;
};

using Section = std::map<std::string, RawEntry>;

struct RawConfig {
    std::string origin;
    std::map<std::string, Section> sections;
};

const std::vector<std::string> kSectionNames = {
    "geometry", "source", "link_a", "link_b", "ifo_a", "ifo_b", "choice_a",
    "choice_b", "det_a", "det_b", "scan", "model", "cbr"};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

RawConfig tokenize(const std::string& text, const std::string& origin) {
    RawConfig raw;
    raw.origin = origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::string current_section;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size() || line[i] == '#') continue;

        if (line[i] == '[') {
            const std::size_t open = i;
            const std::size_t close = line.find(']', open);
            if (close == std::string::npos)
                throw ParseError(origin, line_no, static_cast<int>(open) + 1,
                                 "unterminated section header");
            std::string name = line.substr(open + 1, close - open - 1);
            for (char c : name)
                if (!is_ident_char(c))
                    throw ParseError(origin, line_no, static_cast<int>(open) + 2,
                                     "bad section name '" + name + "'");
            if (std::find(kSectionNames.begin(), kSectionNames.end(), name) ==
                kSectionNames.end())
                throw ParseError(origin, line_no, static_cast<int>(open) + 2,
                                 "unknown section '" + name + "'");
            for (std::size_t j = close + 1; j < line.size(); ++j) {
                if (line[j] == '#') break;
                if (!std::isspace(static_cast<unsigned char>(line[j])))
                    throw ParseError(origin, line_no, static_cast<int>(j) + 1,
                                     "trailing characters after section header");
            }
            current_section = name;
            raw.sections[name];  // section may legitimately stay empty
            continue;
        }

        if (current_section.empty())
            throw ParseError(origin, line_no, static_cast<int>(i) + 1,
                             "key outside any section");

        const std::size_t key_start = i;
        while (i < line.size() && is_ident_char(line[i])) ++i;
        if (i == key_start)
            throw ParseError(origin, line_no, static_cast<int>(i) + 1, "expected a key");
        const std::string key = line.substr(key_start, i - key_start);
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size() || line[i] != '=')
            throw ParseError(origin, line_no, static_cast<int>(i) + 1,
                             "expected '=' after key '" + key + "'");
        ++i;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const int value_col = static_cast<int>(i) + 1;
        std::string value = line.substr(i);
        // inline '#' comments end an unquoted value; quoted values may
        // contain '#' and end at the closing quote
        if (!value.empty() && value.front() == '"') {
            const std::size_t close = value.find('"', 1);
            if (close == std::string::npos)
                throw ParseError(origin, line_no, value_col, "unterminated quote");
            for (std::size_t j = close + 1; j < value.size(); ++j) {
                if (value[j] == '#') break;
                if (!std::isspace(static_cast<unsigned char>(value[j])))
                    throw ParseError(origin, line_no, value_col + static_cast<int>(j),
                                     "trailing characters after quoted value");
            }
            value = value.substr(1, close - 1);
        } else {
            const std::size_t hash = value.find('#');
            if (hash != std::string::npos) value = value.substr(0, hash);
            while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back())))
                value.pop_back();
        }
        if (value.empty())
            throw ParseError(origin, line_no, value_col, "empty value for key '" + key + "'");

        auto [it, inserted] = raw.sections[current_section].emplace(
            key, RawEntry{value, line_no, static_cast<int>(key_start) + 1, value_col});
        if (!inserted)
            throw ParseError(origin, line_no, static_cast<int>(key_start) + 1,
                             "duplicate key '" + current_section + "." + key + "'");
    }
    return raw;
}

struct UnitTable {
    const char* expect;  // for error messages
    std::map<std::string, double, std::less<>> factors;
};

const UnitTable kLength{"a length (m, km, cm, mm, um, nm)",
                        {{"m", 1.0},
                         {"km", 1000.0},
                         {"cm", 1e-2},
                         {"mm", 1e-3},
                         {"um", 1e-6},
                         {"nm", 1e-9}}};
const UnitTable kTime{"a time (s, h, min, ms, us, ns, ps, fs)",
                      {{"s", 1.0},
                       {"h", 3600.0},
                       {"min", 60.0},
                       {"ms", 1e-3},
                       {"us", 1e-6},
                       {"ns", 1e-9},
                       {"ps", 1e-12},
                       {"fs", 1e-15}}};
const UnitTable kRate{"a rate (hz, khz, mhz)", {{"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}}};
const UnitTable kSpeed{"a speed (m/s, km/s, km/h, mm/s, mm/h, c)",
                       {{"m/s", 1.0},
                        {"km/s", 1e3},
                        {"km/h", 1.0 / 3.6},
                        {"mm/s", 1e-3},
                        {"mm/h", 1e-3 / 3600.0},
                        {"c", 299792458.0}}};
const UnitTable kAngle{"an angle (rad, deg, mrad)",
                       {{"rad", 1.0}, {"deg", kPi / 180.0}, {"mrad", 1e-3}}};
const UnitTable kLoss{"a loss (db)", {{"db", 1.0}}};
const UnitTable kSlope{"a dispersion slope (ps/nm2/km)",
                       {{"ps/nm2/km", 1.0}, {"ps/nm^2/km", 1.0}}};
const UnitTable kScalar{"a bare number", {{"", 1.0}}};

class Reader {
public:
    Reader(RawConfig& raw) : raw_(raw) {}

    bool has(const std::string& section, const std::string& key) {
        auto s = raw_.sections.find(section);
        return s != raw_.sections.end() && s->second.count(key) > 0;
    }

    /// Fetch and mark used; nullptr when absent.
    RawEntry* entry(const std::string& section, const std::string& key) {
        auto s = raw_.sections.find(section);
        if (s == raw_.sections.end()) return nullptr;
        auto e = s->second.find(key);
        if (e == s->second.end()) return nullptr;
        e->second.used = true;
        return &e->second;
    }

    double quantity(const std::string& section, const std::string& key,
                    const UnitTable& units, double fallback) {
        RawEntry* e = entry(section, key);
        if (!e) return fallback;
        const std::string& v = e->value;
        double number = 0.0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), number);
        if (res.ec != std::errc())
            throw ParseError(raw_.origin, e->line, e->value_col,
                             section + "." + key + ": expected a number");
        std::string unit(res.ptr, v.data() + v.size());
        // tolerate any spacing between number and unit
        unit.erase(std::remove_if(unit.begin(), unit.end(),
                                  [](unsigned char c) { return std::isspace(c); }),
                   unit.end());
        unit = to_lower(unit);
        const auto f = units.factors.find(unit);
        if (f == units.factors.end())
            throw ParseError(raw_.origin, e->line, e->value_col,
                             section + "." + key + ": " +
                                 (unit.empty() ? "missing unit" : "unknown unit '" + unit + "'") +
                                 ", expected " + units.expect);
        return number * f->second;
    }

    std::uint64_t integer(const std::string& section, const std::string& key,
                          std::uint64_t fallback) {
        RawEntry* e = entry(section, key);
        if (!e) return fallback;
        std::uint64_t value = 0;
        const auto res =
            std::from_chars(e->value.data(), e->value.data() + e->value.size(), value);
        if (res.ec != std::errc() || res.ptr != e->value.data() + e->value.size())
            throw ParseError(raw_.origin, e->line, e->value_col,
                             section + "." + key + ": expected a non-negative integer");
        return value;
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback) {
        RawEntry* e = entry(section, key);
        if (!e) return fallback;
        const std::string v = to_lower(e->value);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        throw ParseError(raw_.origin, e->line, e->value_col,
                         section + "." + key + ": expected true or false");
    }

    std::string keyword(const std::string& section, const std::string& key,
                        const std::vector<std::string>& allowed, const std::string& fallback) {
        RawEntry* e = entry(section, key);
        if (!e) return fallback;
        const std::string v = to_lower(e->value);
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string expect;
            for (const auto& a : allowed) expect += (expect.empty() ? "" : ", ") + a;
            throw ParseError(raw_.origin, e->line, e->value_col,
                             section + "." + key + ": expected one of " + expect);
        }
        return v;
    }

    void reject_unknown_keys() const {
        for (const auto& [sname, section] : raw_.sections)
            for (const auto& [kname, e] : section)
                if (!e.used)
                    throw ParseError(raw_.origin, e.line, e.key_col,
                                     "unknown key '" + sname + "." + kname + "'");
    }

private:
    RawConfig& raw_;
};

struct Violations {
    std::vector<std::string> list;

    void require(bool ok, const std::string& field, const std::string& message) {
        if (!ok) list.push_back(field + ": " + message);
    }
};

FiberLink read_link(Reader& r, const std::string& section, Violations& bad) {
    FiberLink link;
    link.optical_length_m = r.quantity(section, "optical_length", kLength, link.optical_length_m);
    link.group_index = r.quantity(section, "group_index", kScalar, link.group_index);
    link.loss_db = r.quantity(section, "loss", kLoss, link.loss_db);
    link.zero_dispersion_wavelength_nm =
        r.quantity(section, "zero_dispersion_wavelength", kLength,
                   link.zero_dispersion_wavelength_nm * 1e-9) * 1e9;
    link.dispersion_slope_ps_nm2_km =
        r.quantity(section, "dispersion_slope", kSlope, link.dispersion_slope_ps_nm2_km);
    link.drift_rate_m_per_s = r.quantity(section, "drift_rate", kSpeed, link.drift_rate_m_per_s);
    bad.require(link.optical_length_m > 0.0, section + ".optical_length", "must be positive");
    bad.require(link.group_index >= 1.0, section + ".group_index", "must be >= 1");
    bad.require(link.loss_db >= 0.0, section + ".loss", "must be >= 0 dB");
    bad.require(link.zero_dispersion_wavelength_nm > 0.0,
                section + ".zero_dispersion_wavelength", "must be positive");
    bad.require(link.dispersion_slope_ps_nm2_km >= 0.0, section + ".dispersion_slope",
                "must be >= 0");
    return link;
}

InterferometerSpec read_ifo(Reader& r, const std::string& section, double coherence_time_s,
                            Violations& bad) {
    InterferometerSpec ifo;
    ifo.phase_rad = r.quantity(section, "phase", kAngle, ifo.phase_rad);
    ifo.arm_imbalance_s = r.quantity(section, "arm_imbalance", kTime, ifo.arm_imbalance_s);
    bad.require(ifo.arm_imbalance_s > coherence_time_s, section + ".arm_imbalance",
                "must exceed the single-photon coherence time for interference "
                "without first-order fringes");
    return ifo;
}

std::optional<ChoiceDeviceSpec> read_choice(Reader& r, const std::string& section,
                                            const Vec3& toward_other, Violations& bad,
                                            bool present) {
    if (!present) return std::nullopt;
    ChoiceDeviceSpec spec;
    const std::string kind = r.keyword(section, "kind", {"absorber", "detector"}, "detector");
    spec.kind = kind == "absorber" ? ChoiceDeviceKind::ABSORBER : ChoiceDeviceKind::DETECTOR;
    // positive = moving toward the far station
    const double speed = r.quantity(section, "speed_along_baseline", kSpeed, 0.0);
    spec.frame.velocity = toward_other * speed;
    spec.extra_path_before_detector_m =
        r.quantity(section, "extra_path_before_detector", kLength, 0.0);
    bad.require(std::fabs(speed) < 299792458.0, section + ".speed_along_baseline",
                "must be slower than light");
    bad.require(spec.extra_path_before_detector_m >= 0.0,
                section + ".extra_path_before_detector", "must be >= 0");
    return spec;
}

DetectorSpec read_detector(Reader& r, const std::string& section, Violations& bad) {
    DetectorSpec det;
    det.efficiency = r.quantity(section, "efficiency", kScalar, det.efficiency);
    det.dark_count_rate_hz = r.quantity(section, "dark_count_rate", kRate, det.dark_count_rate_hz);
    det.coincidence_window_s =
        r.quantity(section, "coincidence_window", kTime, det.coincidence_window_s);
    det.timing_jitter_sigma_s =
        r.quantity(section, "timing_jitter_sigma", kTime, det.timing_jitter_sigma_s);
    bad.require(det.efficiency > 0.0 && det.efficiency <= 1.0, section + ".efficiency",
                "must lie in (0, 1]");
    bad.require(det.dark_count_rate_hz >= 0.0, section + ".dark_count_rate", "must be >= 0");
    bad.require(det.coincidence_window_s > 0.0, section + ".coincidence_window",
                "must be positive");
    bad.require(det.timing_jitter_sigma_s >= 0.0, section + ".timing_jitter_sigma",
                "must be >= 0");
    return det;
}

}  // namespace

LoadedConfig parse_config(const std::string& text, const std::string& origin) {
    RawConfig raw = tokenize(text, origin);
    Reader r(raw);
    Violations bad;
    LoadedConfig cfg;

    GeometrySpec& geo = cfg.experiment.geometry;
    geo.baseline_length_m = r.quantity("geometry", "baseline_length", kLength,
                                       geo.baseline_length_m);
    geo.baseline_azimuth_rad = r.quantity("geometry", "baseline_azimuth", kAngle,
                                          geo.baseline_azimuth_rad);
    geo.lab_latitude_rad = r.quantity("geometry", "lab_latitude", kAngle, geo.lab_latitude_rad);
    bad.require(geo.baseline_length_m > 0.0, "geometry.baseline_length", "must be positive");
    bad.require(std::fabs(geo.lab_latitude_rad) <= kPi / 2.0, "geometry.lab_latitude",
                "must lie in [-90 deg, 90 deg]");

    PhotonPairSource& src = cfg.experiment.source;
    src.center_wavelength_nm =
        r.quantity("source", "center_wavelength", kLength, src.center_wavelength_nm * 1e-9) * 1e9;
    src.zero_dispersion_offset_nm =
        r.quantity("source", "zero_dispersion_offset", kLength,
                   src.zero_dispersion_offset_nm * 1e-9) * 1e9;
    src.filter_bandwidth_nm =
        r.quantity("source", "filter_bandwidth", kLength, src.filter_bandwidth_nm * 1e-9) * 1e9;
    src.pair_rate_hz = r.quantity("source", "pair_rate", kRate, src.pair_rate_hz);
    src.post_selection_factor =
        r.quantity("source", "post_selection_factor", kScalar, src.post_selection_factor);
    bad.require(src.center_wavelength_nm > 0.0, "source.center_wavelength", "must be positive");
    bad.require(src.filter_bandwidth_nm > 0.0, "source.filter_bandwidth", "must be positive");
    bad.require(src.pair_rate_hz >= 0.0, "source.pair_rate", "must be >= 0");
    bad.require(src.post_selection_factor > 0.0 && src.post_selection_factor <= 1.0,
                "source.post_selection_factor", "must lie in (0, 1]");

    cfg.experiment.link_a = read_link(r, "link_a", bad);
    cfg.experiment.link_b = read_link(r, "link_b", bad);

    // Franson condition: the arm imbalance must wash out single-photon
    // interference, i.e. exceed the coherence time lambda^2 / (c dlambda).
    const double lambda_m = src.center_wavelength_nm * 1e-9;
    const double dlambda_m = src.filter_bandwidth_nm * 1e-9;
    const double coherence_s =
        dlambda_m > 0.0 ? lambda_m * lambda_m / (299792458.0 * dlambda_m) : 0.0;
    cfg.experiment.ifo_a = read_ifo(r, "ifo_a", coherence_s, bad);
    cfg.experiment.ifo_b = read_ifo(r, "ifo_b", coherence_s, bad);

    const Vec3 u = cfg.experiment.baseline_unit();
    cfg.experiment.choice_a = read_choice(r, "choice_a", u, bad, raw.sections.count("choice_a"));
    cfg.experiment.choice_b = read_choice(r, "choice_b", -u, bad, raw.sections.count("choice_b"));

    cfg.experiment.det_a = read_detector(r, "det_a", bad);
    cfg.experiment.det_b = read_detector(r, "det_b", bad);
    bad.require(cfg.experiment.det_a.coincidence_window_s ==
                    cfg.experiment.det_b.coincidence_window_s,
                "det_b.coincidence_window", "must match det_a.coincidence_window");

    cfg.plan.duration_s = r.quantity("scan", "duration", kTime, cfg.plan.duration_s);
    cfg.plan.bin_width_s = r.quantity("scan", "bin_width", kTime, cfg.plan.bin_width_s);
    cfg.plan.phase_start_rad = r.quantity("scan", "phase_start", kAngle, cfg.plan.phase_start_rad);
    {
        // rad/s: accept an angle-per-time pair as a bare compound unit
        const UnitTable kAngularRate{"an angular rate (rad/s, mrad/s, deg/s)",
                                     {{"rad/s", 1.0}, {"mrad/s", 1e-3}, {"deg/s", kPi / 180.0}}};
        cfg.plan.phase_rate_rad_per_s =
            r.quantity("scan", "phase_rate", kAngularRate, cfg.plan.phase_rate_rad_per_s);
    }
    cfg.plan.seed = r.integer("scan", "seed", cfg.plan.seed);
    bad.require(cfg.plan.duration_s > 0.0, "scan.duration", "must be positive");
    bad.require(cfg.plan.bin_width_s > 0.0, "scan.bin_width", "must be positive");
    if (cfg.plan.duration_s > 0.0 && cfg.plan.bin_width_s > 0.0) {
        const double ratio = cfg.plan.duration_s / cfg.plan.bin_width_s;
        bad.require(std::fabs(ratio - std::round(ratio)) <= 1e-9 * ratio && ratio >= 1.0,
                    "scan.bin_width", "duration must be an integer number of bins");
    }

    const std::string variant = r.keyword(
        "model", "variant", {"standard_qm", "suarez_scarani", "finite_speed"}, "standard_qm");
    cfg.model.variant = variant == "standard_qm"   ? CollapseVariant::STANDARD_QM
                        : variant == "suarez_scarani" ? CollapseVariant::SUAREZ_SCARANI
                                                      : CollapseVariant::FINITE_SPEED;
    cfg.model.max_visibility = r.quantity("model", "visibility", kScalar, cfg.model.max_visibility);
    cfg.model.after_after_rule =
        r.keyword("model", "after_after_rule", {"correlated", "uncorrelated"}, "correlated") ==
                "correlated"
            ? AfterAfterRule::CORRELATED
            : AfterAfterRule::UNCORRELATED;
    bad.require(cfg.model.max_visibility >= 0.0 && cfg.model.max_visibility <= 1.0,
                "model.visibility", "must lie in [0, 1]");
    const bool has_vqi = r.has("model", "influence_speed");
    if (has_vqi) {
        const double vqi = r.quantity("model", "influence_speed", kSpeed, 0.0);
        bad.require(vqi > 0.0, "model.influence_speed", "must be positive");
        cfg.model.influence_speed_m_per_s = vqi;
    }
    {
        InertialFrame preferred{};  // lab frame unless overridden
        preferred.velocity.x = r.quantity("model", "preferred_frame_ve", kSpeed, 0.0);
        preferred.velocity.y = r.quantity("model", "preferred_frame_vn", kSpeed, 0.0);
        preferred.velocity.z = r.quantity("model", "preferred_frame_vu", kSpeed, 0.0);
        bad.require(norm(preferred.velocity) < 299792458.0, "model.preferred_frame_ve",
                    "preferred-frame speed must be slower than light");
        cfg.model.preferred_frame = preferred;
    }
    if (cfg.model.variant == CollapseVariant::FINITE_SPEED && !has_vqi)
        throw MissingModelParams("model.influence_speed is required for finite_speed");

    cfg.cbr.dipole_speed_m_per_s =
        r.quantity("cbr", "dipole_speed", kSpeed, cfg.cbr.dipole_speed_m_per_s);
    cfg.cbr.dipole_ra_rad = r.quantity("cbr", "dipole_ra", kAngle, cfg.cbr.dipole_ra_rad);
    cfg.cbr.dipole_dec_rad = r.quantity("cbr", "dipole_dec", kAngle, cfg.cbr.dipole_dec_rad);
    cfg.cbr.include_orbital = r.boolean("cbr", "include_orbital", cfg.cbr.include_orbital);
    cfg.cbr.orbital_speed_m_per_s =
        r.quantity("cbr", "orbital_speed", kSpeed, cfg.cbr.orbital_speed_m_per_s);
    cfg.cbr.day_samples =
        static_cast<int>(r.integer("cbr", "day_samples", static_cast<std::uint64_t>(
                                                             cfg.cbr.day_samples)));
    bad.require(cfg.cbr.dipole_speed_m_per_s >= 0.0 &&
                    cfg.cbr.dipole_speed_m_per_s < 299792458.0,
                "cbr.dipole_speed", "must lie in [0, c)");
    bad.require(cfg.cbr.orbital_speed_m_per_s >= 0.0 &&
                    cfg.cbr.orbital_speed_m_per_s < 299792458.0,
                "cbr.orbital_speed", "must lie in [0, c)");
    bad.require(cfg.cbr.day_samples >= 1, "cbr.day_samples", "must be >= 1");

    r.reject_unknown_keys();
    if (!bad.list.empty()) throw ValidationError(bad.list);
    return cfg;
}

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace fransim
