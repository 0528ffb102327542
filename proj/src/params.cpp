#include "tsslab/params.hpp"

#include "tsslab/errors.hpp"

#include <cmath>
#include <string>

namespace tsslab {

void SystemParams::validate() const
{
    auto positive = [](const char* name, double v) {
        if (!(std::isfinite(v) && v > 0.0))
            throw ParameterError(std::string(name) + " must be finite and > 0, got " + std::to_string(v));
    };
    auto non_negative = [](const char* name, double v) {
        if (!(std::isfinite(v) && v >= 0.0))
            throw ParameterError(std::string(name) + " must be finite and >= 0, got " + std::to_string(v));
    };

    positive("grid.f0", f0);
    positive("grid.Xg", Xg);
    positive("grid.Ug", Ug_nominal);
    positive("grid.Ut_ref", Ut_ref);
    non_negative("grid.Pin", Pin);
    positive("machine.Xs", Xs);
    positive("machine.Xm", Xm);
    positive("machine.H", H);
    positive("machine.omega_r_ref", omega_r_ref);
    non_negative("rsc.kp", kpw);
    positive("rsc.ki", kiw);
    non_negative("tvc.kp", kpV);
    positive("tvc.ki", kiV);
    positive("pll.kp", kppll);
    positive("pll.ki", kipll);
    non_negative("lvrt.Ke", Ke);
    positive("lvrt.Imax", Imax);
    positive("lvrt.threshold", lvrt_threshold);
    positive("lvrt.knee", lvrt_knee);
    positive("ramp.K", Kramp);
}

} // namespace tsslab
