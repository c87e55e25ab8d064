#include "mch/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mch::io {

std::string fmt_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw IoError("parse_double: bad number '" + s + "'");
    return v;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
        throw IoError("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(body.data(), (std::streamsize)body.size());
    if (!f) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

CsvTable parse_csv(const std::string& body) {
    CsvTable t;
    std::istringstream ss(body);
    std::string line;
    bool first = true;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            cells.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

SvgCanvas::SvgCanvas(double x_min, double x_max, double y_min, double y_max,
                     int width, int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), w_(width),
      h_(height) {
    if (!(x_max > x_min) || !(y_max > y_min))
        throw DomainError("SvgCanvas: empty view box");
}

namespace {
constexpr double kMargin = 42.0;

std::string px_str(double v) {
    // fixed 2-decimal pixel coordinates keep files small and deterministic
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}
} // namespace

double SvgCanvas::px(double x) const {
    return kMargin + (x - x_min_) / (x_max_ - x_min_) * (w_ - 2.0 * kMargin);
}

double SvgCanvas::py(double y) const {
    return h_ - kMargin - (y - y_min_) / (y_max_ - y_min_) * (h_ - 2.0 * kMargin);
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& stroke, double width,
                         const std::string& dash) {
    if (pts.size() < 2) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             px_str(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += " points=\"";
    for (const auto& [x, y] : pts)
        body_ += px_str(px(x)) + "," + px_str(py(y)) + " ";
    body_ += "\"/>\n";
}

void SvgCanvas::circle(double x, double y, double radius_px,
                       const std::string& fill) {
    body_ += "<circle cx=\"" + px_str(px(x)) + "\" cy=\"" + px_str(py(y)) +
             "\" r=\"" + px_str(radius_px) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& body) {
    body_ += "<text x=\"" + px_str(px(x)) + "\" y=\"" + px_str(py(y)) +
             "\" font-size=\"11\" font-family=\"monospace\">" + body +
             "</text>\n";
}

std::string SvgCanvas::str() const {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(w_) + "\" height=\"" + std::to_string(h_) +
                      "\" viewBox=\"0 0 " + std::to_string(w_) + " " +
                      std::to_string(h_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += body_;
    // axes through the origin when visible, frame otherwise
    auto line = [&](double x1, double y1, double x2, double y2) {
        out += "<line x1=\"" + px_str(x1) + "\" y1=\"" + px_str(y1) +
               "\" x2=\"" + px_str(x2) + "\" y2=\"" + px_str(y2) +
               "\" stroke=\"#888\" stroke-width=\"0.8\"/>\n";
    };
    if (x_min_ < 0.0 && x_max_ > 0.0)
        line(px(0.0), py(y_min_), px(0.0), py(y_max_));
    if (y_min_ < 0.0 && y_max_ > 0.0)
        line(px(x_min_), py(0.0), px(x_max_), py(0.0));
    line(px(x_min_), py(y_min_), px(x_max_), py(y_min_));
    line(px(x_min_), py(y_min_), px(x_min_), py(y_max_));
    out += "</svg>\n";
    return out;
}

namespace {

void draw_hyperbola(SvgCanvas& svg, double c, double v2_coeff, double phi_max,
                    double v_max, const std::string& dash) {
    // phi^2 - v^2 / v2_coeff = c, drawn branch by branch
    auto draw_half = [&](double phi_sign, double v_sign) {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i <= 400; ++i) {
            const double v = v_sign * v_max * i / 400.0;
            const double p2 = c + v * v / v2_coeff;
            if (p2 < 0.0) continue;
            const double phi = phi_sign * std::sqrt(p2);
            if (std::fabs(phi) > phi_max) continue;
            pts.push_back({phi, v});
        }
        std::sort(pts.begin(), pts.end(),
                  [](auto& a, auto& b) { return a.second < b.second; });
        svg.polyline(pts, "black", 1.2, dash);
    };
    draw_half(1.0, 1.0);
    draw_half(1.0, -1.0);
    draw_half(-1.0, 1.0);
    draw_half(-1.0, -1.0);
}

} // namespace

std::string render_phase_svg(const ModelParams& p,
                             const std::vector<double>& levels,
                             double phi_max) {
    const double v_max = phi_max;
    SvgCanvas svg(-phi_max, phi_max, -v_max, v_max);

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
    int ci = 0;
    for (double h : levels) {
        const std::string color = palette[ci++ % 8];
        for (phase::BranchSign sign :
             {phase::BranchSign::Plus, phase::BranchSign::Minus}) {
            std::vector<phase::BranchSample> samples;
            try {
                samples = phase::sample_branch(p, h, sign, 800, phi_max);
            } catch (const Error&) {
                continue;
            }
            std::vector<std::pair<double, double>> up, dn;
            double prev_phi = -kInfiniteEll;
            for (const auto& s : samples) {
                if (s.phi < prev_phi ||
                    (prev_phi > -phi_max && s.phi - prev_phi > 0.2 * phi_max)) {
                    svg.polyline(up, color, 1.0);
                    svg.polyline(dn, color, 1.0);
                    up.clear();
                    dn.clear();
                }
                up.push_back({s.phi, s.v});
                dn.push_back({s.phi, -s.v});
                prev_phi = s.phi;
            }
            svg.polyline(up, color, 1.0);
            svg.polyline(dn, color, 1.0);
        }
    }

    draw_hyperbola(svg, p.c, 3.0, phi_max, v_max, "");      // patch: solid
    draw_hyperbola(svg, p.c, 1.0, phi_max, v_max, "6,4");   // jump: dashed

    try {
        for (const auto& cp : phase::classify_critical_points(p)) {
            const char* fill = cp.kind == phase::CritKind::Saddle ? "#d62728"
                               : cp.kind == phase::CritKind::Center ? "#2ca02c"
                                                                    : "#444";
            svg.circle(cp.location.phi, cp.location.v, 3.5, fill);
        }
    } catch (const Error&) {
    }

    svg.text(-phi_max * 0.98, v_max * 0.93,
             "k=" + fmt_double(p.k) + " c=" + fmt_double(p.c) +
                 " g=" + fmt_double(p.g));
    return svg.str();
}

std::string render_profile_svg(const wave::WaveProfile& profile) {
    double xi_lo = profile.xi_min, xi_hi = profile.xi_max;
    if (std::isfinite(profile.period) && profile.period > 0.0) {
        xi_lo = profile.xi_min - profile.period;
        xi_hi = profile.xi_min + 2.0 * profile.period;
    }
    double lo = 0.0, hi = 0.0;
    const int n = 1200;
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= n; ++i) {
        const double xi = xi_lo + (xi_hi - xi_lo) * i / n;
        const double u = profile.eval(xi).phi;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        pts.push_back({xi, u});
    }
    const double pad = 0.1 * std::max(1e-6, hi - lo);
    SvgCanvas svg(xi_lo, xi_hi, lo - pad, hi + pad);
    svg.polyline(pts, "#1f77b4", 1.4);
    for (const auto& j : profile.joints)
        svg.circle(j.xi, j.phi, 3.0, "#d62728");
    return svg.str();
}

std::string render_curve_svg(const curve::PlanarPolyline& poly,
                             const std::vector<double>& cusp_s) {
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    for (const auto& v : poly.vertices) {
        x_lo = std::min(x_lo, v[0]);
        x_hi = std::max(x_hi, v[0]);
        y_lo = std::min(y_lo, v[1]);
        y_hi = std::max(y_hi, v[1]);
    }
    const double pad = 0.08 * std::max({1e-6, x_hi - x_lo, y_hi - y_lo});
    SvgCanvas svg(x_lo - pad, x_hi + pad, y_lo - pad, y_hi + pad, 600, 600);
    std::vector<std::pair<double, double>> pts;
    for (const auto& v : poly.vertices) pts.push_back({v[0], v[1]});
    svg.polyline(pts, "#1f77b4", 1.4);
    for (double sc : cusp_s) {
        // nearest vertex by arclength parameter
        const auto it = std::lower_bound(poly.s.begin(), poly.s.end(), sc);
        std::size_t idx = (std::size_t)(it - poly.s.begin());
        if (idx >= poly.vertices.size()) idx = poly.vertices.size() - 1;
        svg.circle(poly.vertices[idx][0], poly.vertices[idx][1], 3.5, "#d62728");
    }
    return svg.str();
}

} // namespace mch::io
