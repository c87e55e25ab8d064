#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mch/curve_flows.hpp"
#include "mch/errors.hpp"
#include "mch/params.hpp"
#include "mch/phase_plane.hpp"
#include "mch/wave_builder.hpp"

namespace mch::io {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip decimal representation; infinities print as
// "inf"/"-inf".
std::string fmt_double(double x);

// Inverse of fmt_double ("inf" accepted); IoError on garbage.
double parse_double(const std::string& s);

std::string sha256_hex(const std::string& data);

void write_text_file(const std::filesystem::path& path, const std::string& body);
std::string read_text_file(const std::filesystem::path& path);

// Rows of preformatted cells under a header line.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string str() const;
};

CsvTable parse_csv(const std::string& body);

// Minimal deterministic SVG canvas in data coordinates; no timestamps.
class SvgCanvas {
public:
    SvgCanvas(double x_min, double x_max, double y_min, double y_max,
              int width = 720, int height = 540);

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& stroke, double width = 1.0,
                  const std::string& dash = "");
    void circle(double x, double y, double radius_px, const std::string& fill);
    void text(double x, double y, const std::string& body);

    std::string str() const; // axes drawn last

private:
    double x_min_, x_max_, y_min_, y_max_;
    int w_, h_;
    std::string body_;
    double px(double x) const;
    double py(double y) const;
};

// Portrait of level sets H = h over the listed levels, with the two
// hyperbola overlays (solid phi^2 - v^2/3 = c, dashed phi^2 - v^2 = c) and
// critical-point markers.
std::string render_phase_svg(const ModelParams& p,
                             const std::vector<double>& levels,
                             double phi_max = 6.0);

std::string render_profile_svg(const wave::WaveProfile& profile);

// Planar curve with cusp markers at the given arclength locations.
std::string render_curve_svg(const curve::PlanarPolyline& poly,
                             const std::vector<double>& cusp_s);

} // namespace mch::io
