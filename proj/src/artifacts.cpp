#include "psbrm/artifacts.hpp"

#include "psbrm/types.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace psbrm {

std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string trajectory_csv(const RunTrajectory& traj)
{
    std::string out = "iteration,f_p,J_p,J_inf,err_linf,err_l2u,diverged_flag\n";
    const char* flag = traj.diverged ? "1" : "0";
    for (const auto& r : traj.records) {
        out += std::to_string(r.iteration);
        for (double v : {r.f_p, r.J_p, r.J_inf, r.err_linf, r.err_l2u}) {
            out += ',';
            out += format_real(v);
        }
        out += ',';
        out += flag;
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view contents)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
        throw IoError("short write to " + path.string());
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv)
{
    auto p = csv;
    return p.replace_extension(".meta.json");
}

std::filesystem::path plot_path_for(const std::filesystem::path& csv)
{
    auto p = csv;
    return p.replace_extension(".plot.py");
}

std::string plot_script(const std::filesystem::path& csv, const std::string& x_column,
                        const std::vector<std::string>& y_columns, const std::string& title, bool log_y)
{
    std::ostringstream os;
    os << "# Regenerates the figure for " << csv.filename().string() << " (requires matplotlib).\n"
       << "import csv, os\n"
       << "import matplotlib\n"
       << "matplotlib.use('Agg')\n"
       << "import matplotlib.pyplot as plt\n\n"
       << "here = os.path.dirname(os.path.abspath(__file__))\n"
       << "path = os.path.join(here, '" << csv.filename().string() << "')\n"
       << "with open(path) as f:\n"
       << "    rows = list(csv.DictReader(f))\n\n"
       << "def num(v):\n"
       << "    try:\n"
       << "        return float(v)\n"
       << "    except ValueError:\n"
       << "        return float('nan')\n\n"
       << "x = [num(r['" << x_column << "']) for r in rows]\n"
       << "fig, ax = plt.subplots(figsize=(6, 4))\n";
    for (const auto& y : y_columns)
        os << "ax.plot(x, [num(r['" << y << "']) for r in rows], label='" << y << "')\n";
    if (log_y)
        os << "ax.set_yscale('log')\n";
    os << "ax.set_xlabel('" << x_column << "')\n"
       << "ax.set_title('" << title << "')\n"
       << "ax.legend()\n"
       << "fig.tight_layout()\n"
       << "fig.savefig(os.path.splitext(path)[0] + '.png', dpi=150)\n";
    return os.str();
}

void write_artifact(const std::filesystem::path& csv, const std::string& csv_text, const nlohmann::json& meta,
                    const std::string& plot)
{
    write_text(csv, csv_text);
    write_text(meta_path_for(csv), meta.dump(2) + "\n");
    write_text(plot_path_for(csv), plot);
}

} // namespace psbrm
