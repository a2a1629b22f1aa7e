#include "dbar/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "dbar/io.hpp"
#include "dbar/pipeline.hpp"

namespace dbar {

const std::array<std::array<unsigned char, 3>, 256>& diverging_palette() {
  static const auto palette = [] {
    std::array<std::array<unsigned char, 3>, 256> p{};
    const double blue[3] = {0.180, 0.310, 0.740};
    const double white[3] = {0.970, 0.970, 0.970};
    const double red[3] = {0.760, 0.100, 0.130};
    for (int i = 0; i < 256; ++i) {
      const double t = i / 255.0;
      double rgb[3];
      if (t < 0.5) {
        const double u = t * 2;
        for (int c = 0; c < 3; ++c) rgb[c] = blue[c] + u * (white[c] - blue[c]);
      } else {
        const double u = (t - 0.5) * 2;
        for (int c = 0; c < 3; ++c) rgb[c] = white[c] + u * (red[c] - white[c]);
      }
      for (int c = 0; c < 3; ++c)
        p[size_t(i)][size_t(c)] = (unsigned char)std::lround(255.0 * rgb[c]);
    }
    return p;
  }();
  return palette;
}

namespace {

bool point_in_polygon(double x, double y, const Points2<double>& poly) {
  bool inside = false;
  const Eigen::Index n = poly.rows();
  for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
    const double xi = poly(i, 0), yi = poly(i, 1);
    const double xj = poly(j, 0), yj = poly(j, 1);
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

// Uniform bucket grid over [-1.05, 1.05]^2 for nearest-point lookups.
class BucketIndex {
 public:
  explicit BucketIndex(const ComplexVector<double>& pts) : pts_(pts) {
    cells_ = std::max<Eigen::Index>(4, Eigen::Index(std::sqrt(double(pts.size()))));
    buckets_.resize(size_t(cells_ * cells_));
    for (Eigen::Index i = 0; i < pts.size(); ++i)
      buckets_[size_t(cell_of(pts(i).real(), pts(i).imag()))].push_back(i);
  }

  Eigen::Index nearest(double x, double y) const {
    const Eigen::Index cx = clamp_cell((x - lo_) / (hi_ - lo_) * double(cells_));
    const Eigen::Index cy = clamp_cell((y - lo_) / (hi_ - lo_) * double(cells_));
    Eigen::Index best = -1;
    double bd = std::numeric_limits<double>::max();
    for (Eigen::Index ring = 0; ring < cells_; ++ring) {
      for (Eigen::Index i = std::max<Eigen::Index>(0, cx - ring);
           i <= std::min(cells_ - 1, cx + ring); ++i) {
        for (Eigen::Index j = std::max<Eigen::Index>(0, cy - ring);
             j <= std::min(cells_ - 1, cy + ring); ++j) {
          if (ring > 0 && std::abs(i - cx) != ring && std::abs(j - cy) != ring) continue;
          for (const Eigen::Index p : buckets_[size_t(i * cells_ + j)]) {
            const double dx = pts_(p).real() - x, dy = pts_(p).imag() - y;
            const double d = dx * dx + dy * dy;
            if (d < bd) {
              bd = d;
              best = p;
            }
          }
        }
      }
      // Safe to stop once the found distance is within the searched ring.
      const double ring_reach = double(ring) * (hi_ - lo_) / double(cells_);
      if (best >= 0 && std::sqrt(bd) <= ring_reach) break;
    }
    return best;
  }

 private:
  Eigen::Index cell_of(double x, double y) const {
    return clamp_cell((x - lo_) / (hi_ - lo_) * double(cells_)) * cells_ +
           clamp_cell((y - lo_) / (hi_ - lo_) * double(cells_));
  }
  Eigen::Index clamp_cell(double v) const {
    return std::max<Eigen::Index>(0, std::min(cells_ - 1, Eigen::Index(v)));
  }

  const ComplexVector<double>& pts_;
  Eigen::Index cells_;
  double lo_ = -1.05, hi_ = 1.05;
  std::vector<std::vector<Eigen::Index>> buckets_;
};

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_sigma_ppm(const ComplexVector<double>& zmesh, const Eigen::VectorXd& sigma,
                             const NormalizedDomain<double>& dom, double delta, int size) {
  if (zmesh.size() != sigma.size()) throw InputError("sigma/z-mesh size mismatch");
  const auto& pal = diverging_palette();
  const BucketIndex index(zmesh);
  std::string out = "P6\n" + std::to_string(size) + " " + std::to_string(size) + "\n255\n";
  out.reserve(out.size() + size_t(size) * size_t(size) * 3);
  const double lo = -1.05, hi = 1.05;
  for (int py = 0; py < size; ++py) {
    const double y = hi - (py + 0.5) * (hi - lo) / size;  // row 0 at +y
    for (int px = 0; px < size; ++px) {
      const double x = lo + (px + 0.5) * (hi - lo) / size;
      unsigned char rgb[3] = {255, 255, 255};
      if (point_in_polygon(x, y, dom.boundary.points)) {
        const Eigen::Index zi = index.nearest(x, y);
        const double t = std::clamp((sigma(zi) - (1.0 - delta)) / (2.0 * delta), 0.0, 1.0);
        const auto& c = pal[size_t(std::lround(t * 255.0))];
        rgb[0] = c[0];
        rgb[1] = c[1];
        rgb[2] = c[2];
      }
      out.push_back(char(rgb[0]));
      out.push_back(char(rgb[1]));
      out.push_back(char(rgb[2]));
    }
  }
  return out;
}

void write_sigma_ppm(const std::string& path, const ComplexVector<double>& zmesh,
                     const Eigen::VectorXd& sigma, const NormalizedDomain<double>& dom,
                     double delta, int size) {
  write_file(path, render_sigma_ppm(zmesh, sigma, dom, delta, size));
}

std::string render_speedup_svg(const std::vector<TimingReport>& rows, const std::string& schedule) {
  const int W = 640, H = 420, ML = 60, MR = 160, MT = 30, MB = 50;
  const double plot_w = W - ML - MR, plot_h = H - MT - MB;

  std::map<std::string, std::vector<const TimingReport*>> by_mesh;
  double max_cores = 1, max_speedup = 1;
  for (const auto& r : rows) {
    if (r.schedule != schedule) continue;
    by_mesh[r.mesh].push_back(&r);
    max_cores = std::max(max_cores, double(r.cores));
    max_speedup = std::max(max_speedup, r.speedup);
  }
  if (by_mesh.empty()) throw InputError("no benchmark rows for schedule '" + schedule + "'");
  for (auto& [mesh, list] : by_mesh)
    std::sort(list.begin(), list.end(),
              [](const TimingReport* a, const TimingReport* b) { return a->cores < b->cores; });
  max_speedup = std::max(max_speedup * 1.15, 2.0);

  auto sx = [&](double c) { return ML + (c - 1.0) / std::max(1.0, max_cores - 1.0) * plot_w; };
  auto sy = [&](double s) { return MT + plot_h - s / max_speedup * plot_h; };

  const char* colors[] = {"#2b6cb0", "#2f855a", "#c53030", "#6b46c1", "#b7791f"};
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) + "\" height=\"" +
      std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) + " " + std::to_string(H) +
      "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(ML) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">speedup vs cores (" +
         schedule + " schedule); dashed = Amdahl fit</text>\n";
  // axes
  svg += "<line x1=\"" + fmt2(ML) + "\" y1=\"" + fmt2(MT + plot_h) + "\" x2=\"" + fmt2(ML + plot_w) +
         "\" y2=\"" + fmt2(MT + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt2(ML) + "\" y1=\"" + fmt2(MT) + "\" x2=\"" + fmt2(ML) + "\" y2=\"" +
         fmt2(MT + plot_h) + "\" stroke=\"black\"/>\n";
  for (int c = 1; c <= int(max_cores); c *= 2) {
    svg += "<text x=\"" + fmt2(sx(c) - 4) + "\" y=\"" + fmt2(MT + plot_h + 18) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + std::to_string(c) + "</text>\n";
  }
  for (double s = 1; s <= max_speedup; s += std::max(1.0, std::floor(max_speedup / 6))) {
    svg += "<text x=\"" + fmt2(ML - 28) + "\" y=\"" + fmt2(sy(s) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt2(s) + "</text>\n";
  }
  svg += "<text x=\"" + fmt2(ML + plot_w / 2 - 20) + "\" y=\"" + fmt2(H - 12) +
         "\" font-family=\"sans-serif\" font-size=\"12\">cores</text>\n";

  int ci = 0;
  for (const auto& [mesh, list] : by_mesh) {
    const char* color = colors[size_t(ci % 5)];
    std::vector<double> cs, sp;
    std::string solid;
    for (const auto* r : list) {
      cs.push_back(double(r->cores));
      sp.push_back(r->speedup);
      solid += fmt2(sx(double(r->cores))) + "," + fmt2(sy(r->speedup)) + " ";
    }
    const double p = fit_parallel_fraction(cs, sp);
    std::string dashed;
    const int steps = 48;
    for (int i = 0; i <= steps; ++i) {
      const double c = 1.0 + (max_cores - 1.0) * i / steps;
      dashed += fmt2(sx(c)) + "," + fmt2(sy(amdahl_speedup(p, c))) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" stroke-dasharray=\"6,4\" points=\"" + dashed + "\"/>\n";
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + solid + "\"/>\n";
    const double ly = MT + 16 + 18 * ci;
    svg += "<line x1=\"" + fmt2(ML + plot_w + 10) + "\" y1=\"" + fmt2(ly) + "\" x2=\"" +
           fmt2(ML + plot_w + 34) + "\" y2=\"" + fmt2(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    char pbuf[64];
    std::snprintf(pbuf, sizeof pbuf, "%s (p=%.3f)", mesh.c_str(), p);
    svg += "<text x=\"" + fmt2(ML + plot_w + 40) + "\" y=\"" + fmt2(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + pbuf + "</text>\n";
    ++ci;
  }
  svg += "</svg>\n";
  return svg;
}

void write_speedup_svg(const std::string& path, const std::vector<TimingReport>& rows,
                       const std::string& schedule) {
  write_file(path, render_speedup_svg(rows, schedule));
}

}  // namespace dbar
