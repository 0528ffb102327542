#include "tsslab/config.hpp"

#include "tsslab/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace tsslab {

namespace {

struct Entry {
    std::string key;
    std::string value;
    std::string where;  // origin:line for messages
};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s)
{
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

std::vector<Entry> parse_kv(std::string_view text, std::string_view origin)
{
    std::vector<Entry> out;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string where = std::string(origin) + ":" + std::to_string(n);
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(where + ": unterminated section header");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(where + ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty())
            throw ConfigError(where + ": missing key");
        out.push_back({section.empty() ? key : section + "." + key,
                       unquote(trim(std::string_view(t).substr(eq + 1))), where});
    }
    return out;
}

std::string json_scalar(const nlohmann::json& v, const std::string& key)
{
    if (v.is_null())
        return "auto";
    if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
    if (v.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_string())
        return v.get<std::string>();
    throw ConfigError("json key '" + key + "': unsupported value type");
}

void flatten_json(const nlohmann::json& j, const std::string& prefix, std::string_view origin,
                  std::vector<Entry>& out)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const auto& v = it.value();
        if (v.is_object()) {
            flatten_json(v, key, origin, out);
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v) {
                if (!joined.empty())
                    joined += ", ";
                joined += json_scalar(e, key);
            }
            out.push_back({key, joined, std::string(origin)});
        } else {
            out.push_back({key, json_scalar(v, key), std::string(origin)});
        }
    }
}

std::vector<Entry> parse_entries(std::string_view text, std::string_view origin)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string(origin) + ": " + e.what());
        }
        std::vector<Entry> out;
        flatten_json(j, "", origin, out);
        return out;
    }
    return parse_kv(text, origin);
}

double to_double(const Entry& e)
{
    std::string s = e.value;
    if (!s.empty() && s.front() == '+')
        s.erase(0, 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError(e.where + ": '" + e.key + "' expects a number, got '" + e.value + "'");
    return v;
}

bool to_bool(const Entry& e)
{
    if (e.value == "true" || e.value == "yes" || e.value == "1")
        return true;
    if (e.value == "false" || e.value == "no" || e.value == "0")
        return false;
    throw ConfigError(e.where + ": '" + e.key + "' expects true/false, got '" + e.value + "'");
}

std::vector<std::string> to_list(const Entry& e)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

const std::map<std::string, double SystemParams::*, std::less<>>& param_keys()
{
    static const std::map<std::string, double SystemParams::*, std::less<>> keys = {
        {"grid.f0", &SystemParams::f0},
        {"grid.Xg", &SystemParams::Xg},
        {"grid.Ug", &SystemParams::Ug_nominal},
        {"grid.Ut_ref", &SystemParams::Ut_ref},
        {"grid.Pin", &SystemParams::Pin},
        {"machine.Xs", &SystemParams::Xs},
        {"machine.Xm", &SystemParams::Xm},
        {"machine.H", &SystemParams::H},
        {"machine.omega_r_ref", &SystemParams::omega_r_ref},
        {"rsc.kp", &SystemParams::kpw},
        {"rsc.ki", &SystemParams::kiw},
        {"tvc.kp", &SystemParams::kpV},
        {"tvc.ki", &SystemParams::kiV},
        {"pll.kp", &SystemParams::kppll},
        {"pll.ki", &SystemParams::kipll},
        {"lvrt.Ke", &SystemParams::Ke},
        {"lvrt.Imax", &SystemParams::Imax},
        {"lvrt.threshold", &SystemParams::lvrt_threshold},
        {"lvrt.knee", &SystemParams::lvrt_knee},
        {"ramp.K", &SystemParams::Kramp},
    };
    return keys;
}

bool apply_param_entry(SystemParams& p, const Entry& e)
{
    const auto& keys = param_keys();
    const auto it = keys.find(e.key);
    if (it == keys.end())
        return false;
    p.*(it->second) = to_double(e);
    return true;
}

void reject_duplicates(const std::vector<Entry>& es)
{
    std::map<std::string, std::string, std::less<>> seen;
    for (const Entry& e : es) {
        const auto [it, fresh] = seen.emplace(e.key, e.where);
        if (!fresh)
            throw ConfigError(e.where + ": duplicate key '" + e.key + "' (first at " + it->second + ")");
    }
}

std::string fmt17(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void apply_param_text(SystemParams& p, std::string_view text, std::string_view origin)
{
    const std::vector<Entry> es = parse_entries(text, origin);
    reject_duplicates(es);
    for (const Entry& e : es)
        if (!apply_param_entry(p, e))
            throw ConfigError(e.where + ": unknown parameter key '" + e.key + "'");
}

SystemParams load_preset(std::string_view name)
{
    if (name == kPaperAppendixPreset)
        return SystemParams{};
    if (const char* dir = std::getenv("TSSLAB_PRESET_DIR"); dir && *dir) {
        const std::filesystem::path path = std::filesystem::path(dir) / (std::string(name) + ".conf");
        std::ifstream in(path);
        if (in) {
            std::stringstream buf;
            buf << in.rdbuf();
            SystemParams p;
            apply_param_text(p, buf.str(), path.string());
            return p;
        }
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

RunConfig parse_config(std::string_view text, std::string_view origin, std::string_view preset_override)
{
    const std::vector<Entry> es = parse_entries(text, origin);
    reject_duplicates(es);

    RunConfig c;
    for (const Entry& e : es)
        if (e.key == "preset")
            c.preset = e.value;
    if (!preset_override.empty())
        c.preset = std::string(preset_override);
    c.scenario.params = load_preset(c.preset);

    Scenario& sc = c.scenario;
    for (const Entry& e : es) {
        const std::string& k = e.key;
        if (k == "preset" || apply_param_entry(sc.params, e))
            continue;
        if (k == "scenario.name") {
            sc.name = e.value;
        } else if (k == "scenario.Ug2") {
            sc.Ug2 = to_double(e);
        } else if (k == "scenario.t_f") {
            sc.t_f = to_double(e);
        } else if (k == "scenario.t_c") {
            sc.t_c = e.value == "permanent" ? kPermanentFault : to_double(e);
        } else if (k == "scenario.i_rd2") {
            sc.i_rd2 = to_double(e);
        } else if (k == "scenario.i_rq2") {
            if (e.value == "auto")
                sc.i_rq2.reset();
            else
                sc.i_rq2 = to_double(e);
        } else if (k == "scenario.allow_zero_active_current") {
            sc.allow_zero_active_current = to_bool(e);
        } else if (k == "sim.horizon") {
            sc.horizon = to_double(e);
        } else if (k == "sim.dt") {
            sc.dt = to_double(e);
        } else if (k == "sim.sample_interval") {
            sc.sample_interval = to_double(e);
        } else if (k == "sim.freeze_rotor_during_fault") {
            sc.freeze_rotor_during_fault = to_bool(e);
        } else if (k == "sim.coefficients_follow_rotor") {
            sc.coefficients_follow_rotor = to_bool(e);
        } else if (k == "sim.stop_on_slip") {
            sc.stop_on_slip = to_bool(e);
        } else if (k == "run.methods") {
            c.methods = parse_methods(to_list(e));
        } else if (k.rfind("sweep.", 0) == 0) {
            SweepAxis a;
            a.name = k.substr(6);
            if (!is_sweep_axis(a.name))
                throw ConfigError(e.where + ": '" + a.name + "' is not a sweep axis");
            for (const std::string& v : to_list(e))
                a.values.push_back(to_double({k, v, e.where}));
            c.sweep.push_back(std::move(a));
        } else {
            throw ConfigError(e.where + ": unknown key '" + k + "'");
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path, std::string_view preset_override)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string(), preset_override);
}

std::string write_config(const RunConfig& c)
{
    const SystemParams& p = c.scenario.params;
    const Scenario& sc = c.scenario;
    std::ostringstream o;
    auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };

    o << "# tsslab configuration\n";
    kv("preset", c.preset);

    std::string section;
    for (const auto& [key, member] : param_keys()) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            o << "\n[" << sec << "]\n";
            section = sec;
        }
        o << key.substr(dot + 1) << " = " << fmt17(p.*member) << '\n';
    }

    o << "\n[scenario]\n";
    kv("name", sc.name);
    kv("Ug2", fmt17(sc.Ug2));
    kv("t_f", fmt17(sc.t_f));
    kv("t_c", sc.permanent() ? std::string("permanent") : fmt17(sc.t_c));
    kv("i_rd2", fmt17(sc.i_rd2));
    kv("i_rq2", sc.i_rq2 ? fmt17(*sc.i_rq2) : std::string("auto"));
    kv("allow_zero_active_current", b(sc.allow_zero_active_current));

    o << "\n[sim]\n";
    kv("horizon", fmt17(sc.horizon));
    kv("dt", fmt17(sc.dt));
    kv("sample_interval", fmt17(sc.sample_interval));
    kv("freeze_rotor_during_fault", b(sc.freeze_rotor_during_fault));
    kv("coefficients_follow_rotor", b(sc.coefficients_follow_rotor));
    kv("stop_on_slip", b(sc.stop_on_slip));

    o << "\n[run]\n";
    std::string methods;
    for (const auto& m : method_names(c.methods))
        methods += (methods.empty() ? "" : ", ") + m;
    kv("methods", methods);

    if (!c.sweep.empty()) {
        o << "\n[sweep]\n";
        for (const SweepAxis& a : c.sweep) {
            std::string vals;
            for (double v : a.values)
                vals += (vals.empty() ? "" : ", ") + fmt17(v);
            o << a.name << " = " << vals << '\n';
        }
    }
    return o.str();
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace tsslab
