#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kdqlab/io.hpp"
#include "kdqlab/protocol.hpp"
#include "kdqlab/recon.hpp"
#include "kdqlab/trace.hpp"

/// Run configuration: a `key = value` document, `#` starts a comment.
///
/// Numbers accept a π form: `pi`, `7pi/6`, `0.5*pi`, `11pi/15`. Lists are comma separated.

namespace kdqlab {

struct RunConfig {
    std::string preset = "dimensionless";
    double omega_rabi = 1.0;
    double delta = std::sqrt(3.0);
    StateLabel state = StateLabel::plus;
    double p = 1.0;
    /// Protocol times as Ωt.
    std::vector<double> omega_t_list;
    std::size_t grid_n = 128;
    /// Defaults to 16π/ω when absent.
    std::optional<double> u_max;
    TraceSource source = TraceSource::analytic;
    Taper taper = Taper::none;
    std::size_t window = 7;
    bool noise = false;
    NoiseModel noise_model{};
    std::size_t noise_seeds = 200;
    std::vector<double> p_list;
    double rsur_omega_t = 11.0 * pi / 15.0;
    std::optional<double> hyperfine;
    std::optional<double> rabi_n;
    std::optional<double> rabi_e;
    std::size_t sweep_points = 200;
    std::string out = "out";
    std::uint64_t seed = 0;

    [[nodiscard]] DriveParams drive() const { return {omega_rabi, delta}; }
    [[nodiscard]] UGrid grid() const { return {grid_n, u_max.value_or(16.0 * pi / drive().omega())}; }
    [[nodiscard]] std::vector<double> times() const {
        std::vector<double> t;
        for (double x : omega_t_list) t.push_back(x / omega_rabi);
        return t;
    }
    [[nodiscard]] NvParams nv_params() const { return NvParams(drive(), hyperfine, rabi_n, rabi_e); }
    [[nodiscard]] InitialState<2> initial_state() const { return make_initial_state(drive(), state, p); }
};

inline const std::vector<std::string> &config_keys() {
    static const std::vector<std::string> keys = {
        "preset",      "omega_rabi",    "delta",         "state",        "p",           "omega_t_list",
        "t_list",      "grid_n",        "u_max",         "source",       "taper",       "window",
        "noise",       "amplitude_min", "amplitude_max", "offset_bound", "shot_sigma",  "noise_seeds",
        "p_list",      "rsur_omega_t",  "hyperfine",     "rabi_n",       "rabi_e",      "sweep_points",
        "out",         "seed",
    };
    return keys;
}

using KeyValues = std::map<std::string, std::string>;

/// Splits the document into key/value pairs. Syntax errors and repeated keys raise ParseError.
inline KeyValues parse_key_values(const std::string &text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key))
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": key '" + key + "' repeated");
        kv[key] = value;
    }
    return kv;
}

namespace detail {

[[noreturn]] inline void invalid(const std::string &field, const std::string &why) {
    throw Error(ErrorKind::ValidationError, field + ": " + why);
}

/// number, or [number][*]pi[/number].
inline double parse_value_number(const std::string &field, const std::string &text) {
    std::string t = trim(text);
    if (t.empty()) invalid(field, "empty value");
    const auto pos = t.find("pi");
    try {
        if (pos == std::string::npos) {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) invalid(field, "not a number: '" + text + "'");
            return v;
        }
        std::string lead = trim(t.substr(0, pos));
        if (!lead.empty() && lead.back() == '*') lead = trim(lead.substr(0, lead.size() - 1));
        double factor = 1.0;
        if (lead == "-") {
            factor = -1.0;
        } else if (!lead.empty() && lead != "+") {
            std::size_t used = 0;
            factor = std::stod(lead, &used);
            if (used != lead.size()) invalid(field, "not a number: '" + text + "'");
        }
        std::string tail = trim(t.substr(pos + 2));
        double divisor = 1.0;
        if (!tail.empty()) {
            if (tail.front() != '/') invalid(field, "not a number: '" + text + "'");
            tail = trim(tail.substr(1));
            std::size_t used = 0;
            divisor = std::stod(tail, &used);
            if (used != tail.size() || divisor == 0.0) invalid(field, "bad divisor in '" + text + "'");
        }
        return factor * pi / divisor;
    } catch (const std::logic_error &) {
        invalid(field, "not a number: '" + text + "'");
    }
}

inline double parse_finite(const std::string &field, const std::string &text) {
    const double v = parse_value_number(field, text);
    if (!std::isfinite(v)) invalid(field, "must be finite");
    return v;
}

inline std::vector<double> parse_list(const std::string &field, const std::string &text) {
    std::vector<double> out;
    for (const auto &item : split(text, ',')) out.push_back(parse_finite(field, item));
    if (out.empty()) invalid(field, "list must not be empty");
    return out;
}

inline std::uint64_t parse_unsigned(const std::string &field, const std::string &text) {
    const std::string t = trim(text);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        invalid(field, "expected a nonnegative integer, got '" + text + "'");
    try {
        return std::stoull(t);
    } catch (const std::exception &) {
        invalid(field, "integer out of range: '" + text + "'");
    }
}

inline bool parse_bool(const std::string &field, const std::string &text) {
    const std::string t = trim(text);
    if (t == "true" || t == "on" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "off" || t == "0" || t == "no") return false;
    invalid(field, "expected on/off, got '" + text + "'");
}

inline std::vector<double> default_lattice() {
    std::vector<double> v;
    for (int k = 0; k <= 12; ++k) v.push_back(k * pi / 6.0);
    return v;
}

inline std::vector<double> default_p_list() {
    std::vector<double> v;
    for (int k = 0; k <= 10; ++k) v.push_back(k / 10.0);
    return v;
}

} // namespace detail

/// Builds a validated configuration; defaults fill every absent key.
inline RunConfig build_config(const KeyValues &kv) {
    using namespace detail;
    for (const auto &[key, value] : kv) {
        (void)value;
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
            invalid(key, "unknown key");
    }
    auto get = [&](const std::string &k) -> std::optional<std::string> {
        const auto it = kv.find(k);
        return it == kv.end() ? std::nullopt : std::optional<std::string>(it->second);
    };

    RunConfig c;
    if (auto v = get("preset")) {
        c.preset = trim(*v);
        if (c.preset == "paper") {
            const DriveParams d = DriveParams::paper();
            c.omega_rabi = d.omega_rabi();
            c.delta = d.delta();
        } else if (c.preset != "dimensionless") {
            invalid("preset", "expected dimensionless or paper, got '" + c.preset + "'");
        }
    }
    if (auto v = get("omega_rabi")) c.omega_rabi = parse_finite("omega_rabi", *v);
    if (auto v = get("delta")) c.delta = parse_finite("delta", *v);
    else if (get("omega_rabi")) c.delta = std::sqrt(3.0) * c.omega_rabi;
    if (!(c.omega_rabi > 0.0)) invalid("omega_rabi", "must be positive");

    if (auto v = get("state")) {
        const std::string s = trim(*v);
        if (s == "plus") c.state = StateLabel::plus;
        else if (s == "minus") c.state = StateLabel::minus;
        else if (s == "mixture") c.state = StateLabel::mixture;
        else invalid("state", "expected plus, minus or mixture, got '" + s + "'");
    }
    if (auto v = get("p")) {
        c.p = parse_finite("p", *v);
        if (c.state != StateLabel::mixture) invalid("p", "only meaningful with state = mixture");
    }
    if (c.state == StateLabel::mixture && !get("p")) c.p = 0.5;
    if (c.state == StateLabel::minus) c.p = 0.0;
    if (!(c.p >= 0.0 && c.p <= 1.0)) invalid("p", "must lie in [0,1]");

    if (get("omega_t_list") && get("t_list")) invalid("t_list", "give either t_list or omega_t_list");
    if (auto v = get("omega_t_list")) c.omega_t_list = parse_list("omega_t_list", *v);
    else if (auto v2 = get("t_list")) {
        for (double t : parse_list("t_list", *v2)) c.omega_t_list.push_back(t * c.omega_rabi);
    } else c.omega_t_list = default_lattice();
    for (double x : c.omega_t_list)
        if (x < 0.0) invalid("omega_t_list", "times must be nonnegative");

    if (auto v = get("grid_n")) c.grid_n = parse_unsigned("grid_n", *v);
    if (c.grid_n < min_trace_points || (c.grid_n & (c.grid_n - 1)) != 0)
        invalid("grid_n", "must be a power of two and at least 8");
    if (auto v = get("u_max")) {
        c.u_max = parse_finite("u_max", *v);
        if (!(*c.u_max > 0.0)) invalid("u_max", "must be positive");
    }
    if (auto v = get("source")) {
        const std::string s = trim(*v);
        if (s == "analytic") c.source = TraceSource::analytic;
        else if (s == "circuit") c.source = TraceSource::circuit;
        else if (s == "pulse") c.source = TraceSource::pulse;
        else invalid("source", "expected analytic, circuit or pulse, got '" + s + "'");
    }
    if (auto v = get("taper")) {
        const std::string s = trim(*v);
        if (s == "none") c.taper = Taper::none;
        else if (s == "half_hann") c.taper = Taper::half_hann;
        else invalid("taper", "expected none or half_hann, got '" + s + "'");
    }
    if (auto v = get("window")) c.window = parse_unsigned("window", *v);
    if (c.window == 0 || c.window % 2 == 0) invalid("window", "must be odd and at least 1");

    if (auto v = get("noise")) c.noise = parse_bool("noise", *v);
    if (auto v = get("amplitude_min")) c.noise_model.amplitude_min = parse_finite("amplitude_min", *v);
    if (auto v = get("amplitude_max")) c.noise_model.amplitude_max = parse_finite("amplitude_max", *v);
    if (auto v = get("offset_bound")) c.noise_model.offset_bound = parse_finite("offset_bound", *v);
    if (auto v = get("shot_sigma")) c.noise_model.shot_sigma = parse_finite("shot_sigma", *v);
    if (auto v = get("noise_seeds")) c.noise_seeds = parse_unsigned("noise_seeds", *v);
    if (c.noise_seeds < 2) invalid("noise_seeds", "need at least 2 seeds for a spread");
    try {
        c.noise_model.validate();
    } catch (const Error &e) {
        invalid("noise", e.what());
    }

    if (auto v = get("p_list")) c.p_list = parse_list("p_list", *v);
    else c.p_list = default_p_list();
    for (double p : c.p_list)
        if (!(p >= 0.0 && p <= 1.0)) invalid("p_list", "entries must lie in [0,1]");
    if (auto v = get("rsur_omega_t")) c.rsur_omega_t = parse_finite("rsur_omega_t", *v);
    if (c.rsur_omega_t < 0.0) invalid("rsur_omega_t", "must be nonnegative");

    if (auto v = get("hyperfine")) c.hyperfine = parse_finite("hyperfine", *v);
    if (auto v = get("rabi_n")) c.rabi_n = parse_finite("rabi_n", *v);
    if (auto v = get("rabi_e")) c.rabi_e = parse_finite("rabi_e", *v);
    if (auto v = get("sweep_points")) c.sweep_points = parse_unsigned("sweep_points", *v);
    if (c.sweep_points < 2) invalid("sweep_points", "must be at least 2");

    if (auto v = get("out")) c.out = trim(*v);
    if (c.out.empty()) invalid("out", "must not be empty");
    if (auto v = get("seed")) c.seed = parse_unsigned("seed", *v);
    c.noise_model.seed = c.seed;

    try {
        (void)c.drive();
        (void)c.nv_params();
    } catch (const Error &e) {
        invalid("drive", e.what());
    }
    return c;
}

inline RunConfig parse_config(const std::string &text) { return build_config(parse_key_values(text)); }

/// Canonical key = value text that reproduces `c` through parse_config.
inline std::string config_to_text(const RunConfig &c) {
    auto list = [](const std::vector<double> &v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
        return s;
    };
    std::string s;
    auto put = [&](const std::string &k, const std::string &v) { s += k + " = " + v + "\n"; };
    put("preset", c.preset);
    put("omega_rabi", format_double(c.omega_rabi));
    put("delta", format_double(c.delta));
    put("state", to_string(c.state));
    if (c.state == StateLabel::mixture) put("p", format_double(c.p));
    put("omega_t_list", list(c.omega_t_list));
    put("grid_n", std::to_string(c.grid_n));
    put("u_max", format_double(c.grid().u_max));
    put("source", to_string(c.source));
    put("taper", c.taper == Taper::none ? "none" : "half_hann");
    put("window", std::to_string(c.window));
    put("noise", c.noise ? "on" : "off");
    put("amplitude_min", format_double(c.noise_model.amplitude_min));
    put("amplitude_max", format_double(c.noise_model.amplitude_max));
    put("offset_bound", format_double(c.noise_model.offset_bound));
    put("shot_sigma", format_double(c.noise_model.shot_sigma));
    put("noise_seeds", std::to_string(c.noise_seeds));
    put("p_list", list(c.p_list));
    put("rsur_omega_t", format_double(c.rsur_omega_t));
    const NvParams nv = c.nv_params();
    put("hyperfine", format_double(nv.hyperfine()));
    put("rabi_n", format_double(nv.rabi_n()));
    put("rabi_e", format_double(nv.rabi_e()));
    put("sweep_points", std::to_string(c.sweep_points));
    put("out", c.out);
    put("seed", std::to_string(c.seed));
    return s;
}

} // namespace kdqlab
