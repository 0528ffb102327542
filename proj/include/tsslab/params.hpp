#pragma once

#include <numbers>
#include <string>
#include <string_view>

namespace tsslab {

/// Per-unit constants of the DFIG grid-tied system and its controllers.
///
/// Reactances are on the machine base. Xs is the total stator reactance
/// (leakage plus mutual), so Xs > Xm for physical machines, but only
/// positivity is enforced.
struct SystemParams {
    // Grid
    double f0 = 50.0;          // Hz
    double Xg = 0.5;           // line reactance
    double Ug_nominal = 1.0;   // pre-fault and recovered grid voltage
    double Ut_ref = 1.0;       // terminal-voltage reference
    double Pin = 0.8;          // mechanical input power

    // Machine
    double Xs = 0.171 + 3.9;   // stator leakage + mutual
    double Xm = 3.9;
    double H = 4.0;            // s
    double omega_r_ref = 1.2;  // rotor-speed reference

    // Controllers
    double kpw = 1.0, kiw = 5.0;       // rotor-speed (RSC) PI
    double kpV = 1.0, kiV = 10.0;      // terminal-voltage (TVC) PI
    double kppll = 60.0, kipll = 1400.0;

    // LVRT
    double Ke = 1.5;            // reactive-current ratio
    double Imax = 1.1;          // converter current limit
    double lvrt_threshold = 0.8; // U_t below this enters LVRT
    double lvrt_knee = 0.9;      // voltage at which reactive injection starts
    double Kramp = 0.8;          // active-current ramp rate, p.u./s

    double omega0() const noexcept { return 2.0 * std::numbers::pi * f0; }

    /// Throws ParameterError on the first violated invariant.
    void validate() const;

    bool operator==(const SystemParams&) const = default;
};

/// Built-in preset holding the appendix parameter set.
inline constexpr std::string_view kPaperAppendixPreset = "paper-appendix";

/// Resolves a preset by name. Built-ins first, then `<dir>/<name>.conf`
/// under $TSSLAB_PRESET_DIR. Throws ConfigError for unknown names.
SystemParams load_preset(std::string_view name);

} // namespace tsslab
