#pragma once

// CSV, metadata sidecar and plotting-script writers. Output is byte-stable:
// reals use "%.17g" in the C locale, JSON is dumped with sorted keys, and no
// timestamps or host information are recorded.

#include "psbrm/trajectory.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace psbrm {

/// Shortest text that round-trips the double: "%.17g", "nan", "inf", "-inf".
std::string format_real(double v);

/// FNV-1a 64-bit of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Columns: iteration,f_p,J_p,J_inf,err_linf,err_l2u,diverged_flag.
/// diverged_flag is the run-level flag repeated on every row.
std::string trajectory_csv(const RunTrajectory& traj);

/// Writes `contents` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view contents);

/// `<stem>.meta.json` next to a CSV.
std::filesystem::path meta_path_for(const std::filesystem::path& csv);
/// `<stem>.plot.py` next to a CSV.
std::filesystem::path plot_path_for(const std::filesystem::path& csv);

/// Minimal matplotlib script plotting `y_columns` against `x_column` of the CSV
/// that sits next to it; `log_y` selects a log scale on the y axis.
std::string plot_script(const std::filesystem::path& csv, const std::string& x_column,
                        const std::vector<std::string>& y_columns, const std::string& title, bool log_y);

/// CSV + sidecar + plot script in one go.
void write_artifact(const std::filesystem::path& csv, const std::string& csv_text, const nlohmann::json& meta,
                    const std::string& plot);

} // namespace psbrm
