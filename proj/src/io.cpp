#include "adsqnm/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

namespace adsqnm {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw Error("cannot open for writing: " + path);
    return f;
}

const std::map<std::string, std::string> kSchemas = {
    {"qnf", "ell_hint,k,re_lambda,im_lambda,residual,converged"},
    {"scan", "re_z,im_z,inv_sigma_min"},
    {"match", "ell,lambda_sharp,quasimode_residual,re_pole,im_pole,distance"},
    {"quasimodes", "ell,lambda_sharp,residual,r1,transition_width"},
    {"energy", "n_radial,time_derivative,boundary_y,horizon,bulk,residual"},
    {"indicial", "k,re_lambda,im_lambda,s_re,s_im,root2_re,root2_im"},
    {"trajectory", "t,r,theta,xi_r,xi_theta,xi_phi,p,exit_reason"},
};

}  // namespace

std::string csv_header(const std::string& name) {
    auto it = kSchemas.find(name);
    if (it == kSchemas.end()) throw Error("unknown csv schema: " + name);
    return it->second;
}

void write_qnf_csv(const std::string& path, const Spectrum& spec) {
    auto f = open_out(path);
    f << csv_header("qnf") << "\n";
    for (auto& e : spec.entries) {
        f << e.ell_hint << "," << spec.k << "," << fmt_g(e.lambda.real()) << ","
          << fmt_g(e.lambda.imag()) << "," << fmt_g(e.residual) << ","
          << (e.converged ? 1 : 0) << "\n";
    }
}

void write_scan_csv(const std::string& path, const ResolventScan& scan) {
    auto f = open_out(path);
    f << csv_header("scan") << "\n";
    for (std::size_t i = 0; i < scan.z.size(); ++i)
        f << fmt_g(scan.z[i].real()) << "," << fmt_g(scan.z[i].imag()) << ","
          << fmt_g(scan.value[i]) << "\n";
}

void write_match_csv(const std::string& path,
                     const std::vector<std::tuple<int, double, PoleMatch>>& rows) {
    auto f = open_out(path);
    f << csv_header("match") << "\n";
    for (auto& [ell, quasi_res, m] : rows) {
        Complex pole = m.found ? *m.found : m.nearest;
        f << ell << "," << fmt_g(m.lambda_sharp) << "," << fmt_g(quasi_res) << ","
          << fmt_g(pole.real()) << "," << fmt_g(pole.imag()) << ","
          << fmt_g(m.distance) << "\n";
    }
}

void write_quasimodes_csv(const std::string& path, const std::vector<Quasimode>& qs) {
    auto f = open_out(path);
    f << csv_header("quasimodes") << "\n";
    for (auto& q : qs)
        f << q.ell << "," << fmt_g(q.lambda_sharp) << "," << fmt_g(q.residual) << ","
          << fmt_g(q.r1) << "," << fmt_g(q.transition_width) << "\n";
}

void write_energy_csv(const std::string& path,
                      const std::vector<std::pair<int, FluxReport>>& pairs) {
    auto f = open_out(path);
    f << csv_header("energy") << "\n";
    for (auto& [n, rep] : pairs)
        f << n << "," << fmt_g(rep.time_derivative_term) << ","
          << fmt_g(rep.boundary_Y_term) << "," << fmt_g(rep.horizon_term) << ","
          << fmt_g(rep.bulk_term) << "," << fmt_g(rep.residual) << "\n";
}

void write_indicial_csv(const std::string& path,
                        const std::vector<std::tuple<int, Complex, IndicialRoots>>& rows) {
    auto f = open_out(path);
    f << csv_header("indicial") << "\n";
    for (auto& [k, lam, ir] : rows)
        f << k << "," << fmt_g(lam.real()) << "," << fmt_g(lam.imag()) << ","
          << fmt_g(ir.s_value.real()) << "," << fmt_g(ir.s_value.imag()) << ","
          << fmt_g(ir.roots[1].real()) << "," << fmt_g(ir.roots[1].imag()) << "\n";
}

void write_trajectory_csv(const std::string& path, const FlowTrajectory& tr) {
    auto f = open_out(path);
    f << csv_header("trajectory") << "\n";
    const char* reasons[] = {"ReachedInnerBoundary", "ReachedOuterBound",
                             "ConvergedToL_plus", "ConvergedToL_minus", "MaxTime"};
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
        auto& s = tr.samples[i];
        f << fmt_g(s.t) << "," << fmt_g(s.point.r) << "," << fmt_g(s.point.theta) << ","
          << fmt_g(s.point.xi_r) << "," << fmt_g(s.point.xi_theta) << ","
          << fmt_g(s.point.xi_phi) << "," << fmt_g(s.p_value) << ",";
        if (i + 1 == tr.samples.size())
            f << reasons[static_cast<int>(tr.exit_reason)];
        f << "\n";
    }
}

namespace {
void put_u32(std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); }
void put_i32(std::ofstream& f, int32_t v) { f.write(reinterpret_cast<char*>(&v), 4); }
void put_f64(std::ofstream& f, double v) { f.write(reinterpret_cast<char*>(&v), 8); }
uint32_t get_u32(std::ifstream& f) {
    uint32_t v;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
int32_t get_i32(std::ifstream& f) {
    int32_t v;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::ifstream& f) {
    double v;
    f.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
void put_matrix_rowmajor(std::ofstream& f, const MatrixXcd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            Complex v = m(i, j);
            f.write(reinterpret_cast<char*>(&v), 16);
        }
}
}  // namespace

void dump_operator(const std::string& path, const DiscreteOperator& op) {
    auto f = open_out(path, true);
    f.write("ADSQNMB1", 8);
    put_u32(f, 1);
    put_u32(f, op.grid->n_radial);
    put_u32(f, op.grid->n_angular);
    put_i32(f, op.k);
    put_f64(f, op.params.M);
    put_f64(f, op.params.a);
    put_f64(f, op.nu);
    put_f64(f, op.grid->delta);
    put_f64(f, op.grid->r_inner);
    put_u32(f, op.size());
    put_matrix_rowmajor(f, op.P0);
    put_matrix_rowmajor(f, op.P1);
    put_matrix_rowmajor(f, op.P2);
}

OperatorDump load_operator(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for reading: " + path);
    char magic[8];
    f.read(magic, 8);
    if (std::memcmp(magic, "ADSQNMB1", 8) != 0) throw Error("bad magic in " + path);
    if (get_u32(f) != 1) throw Error("not an operator dump: " + path);
    OperatorDump d;
    d.n_radial = get_u32(f);
    d.n_angular = get_u32(f);
    d.k = get_i32(f);
    d.M = get_f64(f);
    d.a = get_f64(f);
    d.nu = get_f64(f);
    d.delta = get_f64(f);
    d.r_inner = get_f64(f);
    uint32_t N = get_u32(f);
    for (MatrixXcd* m : {&d.P0, &d.P1, &d.P2}) {
        m->resize(N, N);
        for (uint32_t i = 0; i < N; ++i)
            for (uint32_t j = 0; j < N; ++j) {
                Complex v;
                f.read(reinterpret_cast<char*>(&v), 16);
                (*m)(i, j) = v;
            }
    }
    return d;
}

void dump_vector(const std::string& path, const DiscreteOperator& op,
                 const VectorXcd& v) {
    auto f = open_out(path, true);
    f.write("ADSQNMB1", 8);
    put_u32(f, 2);
    put_u32(f, op.grid->n_radial);
    put_u32(f, op.grid->n_angular);
    put_i32(f, op.k);
    put_f64(f, op.params.M);
    put_f64(f, op.params.a);
    put_f64(f, op.nu);
    put_f64(f, op.grid->delta);
    put_f64(f, op.grid->r_inner);
    put_u32(f, static_cast<uint32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        Complex c = v[i];
        f.write(reinterpret_cast<char*>(&c), 16);
    }
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

struct Canvas {
    std::string body;
    double W = 720, H = 480;
    double ml = 70, mr = 20, mt = 30, mb = 50;
    double x0, x1, y0, y1;  // data ranges

    double px(double x) const { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); }
    double py(double y) const { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); }

    void line(double xa, double ya, double xb, double yb, const char* stroke,
              double width = 1.0) {
        body += "<line x1=\"" + fmt_g(xa) + "\" y1=\"" + fmt_g(ya) + "\" x2=\"" +
                fmt_g(xb) + "\" y2=\"" + fmt_g(yb) + "\" stroke=\"" + stroke +
                "\" stroke-width=\"" + fmt_g(width) + "\"/>\n";
    }
    void circle(double x, double y, double r, const char* fill) {
        body += "<circle cx=\"" + fmt_g(x) + "\" cy=\"" + fmt_g(y) + "\" r=\"" +
                fmt_g(r) + "\" fill=\"" + std::string(fill) + "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill) {
        body += "<rect x=\"" + fmt_g(x) + "\" y=\"" + fmt_g(y) + "\" width=\"" +
                fmt_g(w) + "\" height=\"" + fmt_g(h) + "\" fill=\"" + fill + "\"/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 12,
              const char* anchor = "middle") {
        body += "<text x=\"" + fmt_g(x) + "\" y=\"" + fmt_g(y) + "\" font-size=\"" +
                std::to_string(size) + "\" text-anchor=\"" + anchor +
                "\" font-family=\"sans-serif\">" + s + "</text>\n";
    }
    void axes(const std::string& xlabel, const std::string& ylabel) {
        line(ml, H - mb, W - mr, H - mb, "black");
        line(ml, mt, ml, H - mb, "black");
        for (int i = 0; i <= 4; ++i) {
            double fx = x0 + (x1 - x0) * i / 4.0;
            double fy = y0 + (y1 - y0) * i / 4.0;
            char bx[32], by[32];
            std::snprintf(bx, sizeof(bx), "%.3g", fx);
            std::snprintf(by, sizeof(by), "%.3g", fy);
            text(px(fx), H - mb + 18, bx, 10);
            text(ml - 8, py(fy) + 4, by, 10, "end");
            line(px(fx), H - mb, px(fx), H - mb + 4, "black");
            line(ml - 4, py(fy), ml, py(fy), "black");
        }
        text((ml + W - mr) / 2, H - 12, xlabel);
        body += "<text x=\"16\" y=\"" + fmt_g((mt + H - mb) / 2) +
                "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "transform=\"rotate(-90 16 " +
                fmt_g((mt + H - mb) / 2) + ")\">" + ylabel + "</text>\n";
    }
    std::string finish() const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_g(W) +
               "\" height=\"" + fmt_g(H) + "\" viewBox=\"0 0 " + fmt_g(W) + " " +
               fmt_g(H) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
               body + "</svg>\n";
    }
};

void expand_range(double& lo, double& hi) {
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.06 * (hi - lo);
    lo -= pad;
    hi += pad;
}

}  // namespace

void plot_spectrum_svg(const std::string& path, const Spectrum& spec,
                       const std::vector<double>& quasimode_freqs) {
    Canvas cv;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (auto& e : spec.entries) {
        xlo = std::min(xlo, e.lambda.real());
        xhi = std::max(xhi, e.lambda.real());
        ylo = std::min(ylo, e.lambda.imag());
        yhi = std::max(yhi, e.lambda.imag());
    }
    for (double q : quasimode_freqs) {
        xlo = std::min(xlo, q);
        xhi = std::max(xhi, q);
    }
    yhi = std::max(yhi, 0.1);
    if (spec.entries.empty()) xlo = 0, xhi = 1, ylo = -1;
    expand_range(xlo, xhi);
    expand_range(ylo, yhi);
    cv.x0 = xlo;
    cv.x1 = xhi;
    cv.y0 = ylo;
    cv.y1 = yhi;
    cv.axes("Re lambda", "Im lambda");
    cv.line(cv.px(xlo), cv.py(0.0), cv.px(xhi), cv.py(0.0), "#888", 0.8);
    for (double q : quasimode_freqs)
        cv.line(cv.px(q), cv.py(ylo), cv.px(q), cv.py(yhi), "#2a9d2a", 0.7);
    for (auto& e : spec.entries)
        cv.circle(cv.px(e.lambda.real()), cv.py(e.lambda.imag()), 3.5,
                  e.converged ? "#1f4fa0" : "#c0c0c0");
    cv.text((cv.ml + cv.W) / 2, 20, "QNF spectrum (blue = converged)");
    open_out(path) << cv.finish();
}

void plot_residual_trend_svg(const std::string& path, const ResidualSequence& seq) {
    Canvas cv;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (auto& r : seq.rows) {
        double ly = std::log10(std::max(r.residual, 1e-300));
        xlo = std::min(xlo, double(r.ell));
        xhi = std::max(xhi, double(r.ell));
        ylo = std::min(ylo, ly);
        yhi = std::max(yhi, ly);
    }
    expand_range(xlo, xhi);
    expand_range(ylo, yhi);
    cv.x0 = xlo;
    cv.x1 = xhi;
    cv.y0 = ylo;
    cv.y1 = yhi;
    cv.axes("ell", "log10 residual");
    double l10 = std::log(10.0);
    cv.line(cv.px(xlo), cv.py((seq.slope * xlo + seq.intercept) / l10), cv.px(xhi),
            cv.py((seq.slope * xhi + seq.intercept) / l10), "#d07000", 1.2);
    for (auto& r : seq.rows)
        cv.circle(cv.px(double(r.ell)), cv.py(std::log10(std::max(r.residual, 1e-300))),
                  3.5, "#1f4fa0");
    char buf[80];
    std::snprintf(buf, sizeof(buf), "fit slope = %.4f per unit ell", seq.slope);
    cv.text((cv.ml + cv.W) / 2, 20, buf);
    open_out(path) << cv.finish();
}

void plot_scan_heatmap_svg(const std::string& path, const ResolventScan& scan) {
    Canvas cv;
    const auto& sp = scan.spec;
    cv.x0 = sp.re_min;
    cv.x1 = sp.re_max;
    cv.y0 = sp.h * sp.c_minus;
    cv.y1 = sp.h * sp.c_plus;
    if (cv.x1 <= cv.x0) cv.x1 = cv.x0 + 1;
    if (cv.y1 <= cv.y0) cv.y1 = cv.y0 + 1;
    double vlo = 1e300, vhi = -1e300;
    for (double v : scan.value) {
        if (!std::isfinite(v)) continue;
        double lv = std::log10(std::max(v, 1e-30));
        vlo = std::min(vlo, lv);
        vhi = std::max(vhi, lv);
    }
    if (vhi <= vlo) vhi = vlo + 1;
    double cw = (cv.W - cv.ml - cv.mr) / sp.n_re;
    double ch = (cv.H - cv.mt - cv.mb) / sp.n_im;
    for (int iy = 0; iy < sp.n_im; ++iy)
        for (int ix = 0; ix < sp.n_re; ++ix) {
            double v = scan.value[std::size_t(iy) * sp.n_re + ix];
            double lv = std::isfinite(v) ? std::log10(std::max(v, 1e-30)) : vhi;
            double f = (lv - vlo) / (vhi - vlo);
            int rch = int(255 * f), bch = int(255 * (1 - f));
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x20%02x", rch, bch);
            cv.rect(cv.ml + ix * cw, cv.H - cv.mb - (iy + 1) * ch, cw + 0.5, ch + 0.5,
                    color);
        }
    cv.axes("Re z", "Im z");
    cv.text((cv.ml + cv.W) / 2, 20, "log10(1/sigma_min) over the scan rectangle");
    open_out(path) << cv.finish();
}

void plot_flow_portrait_svg(const std::string& path,
                            const std::vector<FlowTrajectory>& trajectories,
                            double r_plus) {
    Canvas cv;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (auto& tr : trajectories)
        for (auto& s : tr.samples) {
            double xr = s.point.xi_r * s.fiber_scale;  // bounded coordinate
            xlo = std::min(xlo, s.point.r);
            xhi = std::max(xhi, s.point.r);
            ylo = std::min(ylo, xr);
            yhi = std::max(yhi, xr);
        }
    if (trajectories.empty()) xlo = 0, xhi = 1, ylo = -1, yhi = 1;
    expand_range(xlo, xhi);
    expand_range(ylo, yhi);
    cv.x0 = xlo;
    cv.x1 = xhi;
    cv.y0 = ylo;
    cv.y1 = yhi;
    cv.axes("r", "xi_r / <xi>");
    cv.line(cv.px(r_plus), cv.py(ylo), cv.px(r_plus), cv.py(yhi), "#888", 0.8);
    for (auto& tr : trajectories) {
        std::string d = "M";
        for (auto& s : tr.samples) {
            d += " " + fmt_g(cv.px(s.point.r)) + " " +
                 fmt_g(cv.py(s.point.xi_r * s.fiber_scale));
            if (&s == &tr.samples.front()) d += " L";
        }
        cv.body += "<path d=\"" + d +
                   "\" fill=\"none\" stroke=\"#1f4fa0\" stroke-width=\"0.9\"/>\n";
        // direction arrow at the midpoint
        if (tr.samples.size() >= 2) {
            auto& a = tr.samples[tr.samples.size() / 2 - (tr.samples.size() > 2 ? 1 : 0)];
            auto& b = tr.samples[tr.samples.size() / 2];
            double ax = cv.px(a.point.r), ay = cv.py(a.point.xi_r * a.fiber_scale);
            double bx = cv.px(b.point.r), by = cv.py(b.point.xi_r * b.fiber_scale);
            double dx = bx - ax, dy = by - ay;
            double n = std::hypot(dx, dy);
            if (n > 1e-9) {
                dx /= n;
                dy /= n;
                cv.body += "<path d=\"M " + fmt_g(bx) + " " + fmt_g(by) + " L " +
                           fmt_g(bx - 6 * dx + 3 * dy) + " " + fmt_g(by - 6 * dy - 3 * dx) +
                           " L " + fmt_g(bx - 6 * dx - 3 * dy) + " " +
                           fmt_g(by - 6 * dy + 3 * dx) +
                           " Z\" fill=\"#1f4fa0\" class=\"arrow\"/>\n";
            }
        }
    }
    // sources/sinks over r = r+
    cv.circle(cv.px(r_plus), cv.py(std::min(1.0, yhi - 0.01)), 5, "#b02020");
    cv.circle(cv.px(r_plus), cv.py(std::max(-1.0, ylo + 0.01)), 5, "#20702a");
    cv.text((cv.ml + cv.W) / 2, 20,
            "Hamilton flow portrait (red: L+ source, green: L- sink)");
    open_out(path) << cv.finish();
}

}  // namespace adsqnm
