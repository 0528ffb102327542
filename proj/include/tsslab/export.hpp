#pragma once

// Plot-ready CSV/JSON writers and the figure bundles.

#include "tsslab/boa.hpp"
#include "tsslab/staged_sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsslab {

/// Header: t,omega_r,i_rd,i_rq,x_pll,phi_pll,u_td,u_tq,U_t,P_t,stage
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

/// [{"from": 1, "to": 2, "t": ...}, ...]
std::string transitions_json(const Trajectory& tr);

/// Header: phi_pll,x_pll
void write_boundary_csv(std::ostream& os, const BoaBoundary& b);

/// Header: phi,x,inside with inside 1, 0, or -1 for indeterminate.
void write_grid_csv(std::ostream& os, const std::vector<GridCell>& cells);

struct ExportFile {
    std::string name;
    std::string content;
};

/// Ug2 = 0.2, i_rq2 = -0.93, t_f = 0.5 s, (i_rd2, t_c) = (0.3, 1.1), (0.4, 0.782),
/// (0.4, 0.783) for k = 1, 2, 3.
Scenario reference_case(int k, const SystemParams& p);

inline const std::vector<std::string> kFigureIds = {"fig4", "fig5", "fig6", "fig8", "fig9"};

/// Time series of one scenario (columns t,Ug,U_t,i_rd,i_rq,phi_pll,omega_r,stage).
std::vector<ExportFile> export_fig4(const Scenario& sc);
/// Permanent-fault power-angle curves, areas and the Ug/i_rd series.
std::vector<ExportFile> export_fig5(const Scenario& sc);
/// Stage-3 boundaries for i_rd3 = 0.34 and 0.70 with UEP markers.
std::vector<ExportFile> export_fig6(const SystemParams& p);
/// Per case: frozen stage-3 boundary, (phi, x) trajectory, stage-3 entry.
std::vector<ExportFile> export_fig8(const SystemParams& p);
/// Extended-EAC curves (phi,Pe2,Pe3,Pm) and markers phi_s1, phi_cr, phi_u3.
std::vector<ExportFile> export_fig9(const Scenario& sc);

Scenario default_figure_scenario(const std::string& id, const SystemParams& p);

/// Dispatches on id; throws ValidationError for unknown ids.
std::vector<ExportFile> export_figure_data(const std::string& id, const Scenario& sc);

/// Provenance record written next to the outputs of one command.
struct RunManifest {
    std::string command;
    std::string config_hash;  // fnv1a of the config bytes, empty without a config
    std::string version;
    std::string preset;
    std::string started;      // UTC, ISO 8601
    std::string finished;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, std::string>> rows;  // (row id, status)

    std::string to_json() const;
};

std::string utc_now_iso8601();

/// Writes each file under dir (created if missing) and returns the paths.
std::vector<std::filesystem::path> write_files(const std::filesystem::path& dir,
                                               const std::vector<ExportFile>& files);

} // namespace tsslab
