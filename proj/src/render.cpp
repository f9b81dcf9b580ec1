#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "vftop/skeleton.hpp"

namespace vftop {

namespace {

using nlohmann::json;

json pt(Vec2 p) { return json::array({p.x, p.y}); }

Vec2 to_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json cp_json(const CriticalPoint& cp, int id) {
    json j;
    j["id"] = id;
    j["position"] = pt(cp.world);
    j["local"] = pt(cp.local);
    j["cell"] = cp.cell;
    if (cp.super_cell >= 0) j["super_cell"] = cp.super_cell;
    j["index"] = cp.index;
    j["order"] = cp.order;
    j["subtype"] = cp.subtype ? json(subtype_name(*cp.subtype)) : json(nullptr);
    j["delta"] = cp.delta ? json(*cp.delta) : json(nullptr);
    j["synthetic"] = cp.synthetic;
    return j;
}

}  // namespace

nlohmann::json skeleton_to_json(const Skeleton& sk, const Field& field) {
    json j;
    json dom;
    Box b = field.bounds();
    dom["bounds"] = json::array({pt(b.lo), pt(b.hi)});
    dom["periodic"] = json::array({field.periodic_x(), field.periodic_y()});
    dom["cell_shape"] = shape_name(field.cell_shape());
    dom["cell_count"] = field.cell_count();
    if (auto* g = std::get_if<UniformGrid>(&field.topology())) {
        dom["grid"] = {{"W", g->W}, {"H", g->H}, {"origin", pt(g->origin)}, {"spacing", pt(g->spacing)}};
    } else {
        json cells = json::array();
        for (int i = 0; i < field.cell_count(); ++i) {
            CellData c = field.cell(i);
            json poly = json::array();
            for (int k = 0; k < c.size(); ++k) poly.push_back(pt(c.pos[k]));
            cells.push_back(poly);
        }
        dom["cells"] = cells;
    }
    j["domain"] = dom;

    json cps = json::array();
    for (std::size_t i = 0; i < sk.cps.size(); ++i) cps.push_back(cp_json(sk.cps[i], static_cast<int>(i)));
    j["critical_points"] = cps;
    j["index_sum"] = sk.index_sum();

    json seps = json::array();
    for (const auto& s : sk.separatrices) {
        json e;
        e["origin"] = s.origin;
        e["direction"] = s.direction == Direction::Forward ? "forward" : "backward";
        e["terminus"] = terminus_name(s.terminus);
        e["terminus_cp"] = s.terminus_cp >= 0 ? json(s.terminus_cp) : json(nullptr);
        json pts = json::array();
        for (auto p : s.points) pts.push_back(pt(p));
        e["points"] = pts;
        seps.push_back(e);
    }
    j["separatrices"] = seps;

    json scs = json::array();
    for (const auto& sc : sk.super_cells) {
        json e;
        e["members"] = sc.members;
        e["center"] = pt(sc.center);
        e["open"] = sc.open;
        json bd = json::array();
        for (auto p : sc.boundary) bd.push_back(pt(p));
        e["boundary"] = bd;
        if (!sc.open && !sc.boundary.empty()) {
            try {
                json sym = json::array();
                for (auto s : sector_sequence(sc)) sym.push_back(sector_symbol_name(s));
                e["sector_symbols"] = sym;
                auto an = analyze_sectors(sc);
                json kinds = json::array();
                for (auto k : an.sectors) kinds.push_back(sector_kind_name(k));
                e["sectors"] = kinds;
                e["winding"] = an.winding;
            } catch (const Error& err) {
                e["error"] = err.what();
            }
        }
        scs.push_back(e);
    }
    j["super_cells"] = scs;
    j["statistics"] = sk.stats.to_json();

    json insets = json::array();
    auto add_inset = [&](int cell, const char* kind) {
        CellData c = field.cell(cell);
        json e;
        e["cell"] = cell;
        e["kind"] = kind;
        e["shape"] = shape_name(c.shape);
        json corners = json::array(), values = json::array(), local = json::array();
        for (int k = 0; k < c.size(); ++k) {
            corners.push_back(pt(c.pos[k]));
            values.push_back(pt(c.val[k]));
        }
        for (const auto& cp : sk.cps)
            if (cp.cell == cell && cp.super_cell < 0) local.push_back({{"local", pt(cp.local)}, {"index", cp.index}, {"order", cp.order}});
        e["corners"] = corners;
        e["values"] = values;
        e["critical_points"] = local;
        insets.push_back(e);
    };
    for (int c : sk.two_cp_cells) add_inset(c, "two");
    for (int c : sk.second_order_cells) add_inset(c, "second-order");
    j["insets"] = insets;
    j["warnings"] = sk.warnings;
    return j;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

const char* area_color(Vec2 f) {
    if (f.x > 0) return f.y > 0 ? "#9be59b" : "#f3e58a";
    return f.y > 0 ? "#9cc3f0" : "#f0a0a0";
}

// local (s,t) sample grid -> marching-squares segments of one component
template <class Val, class Pos>
void contour(int n, const Val& val, const Pos& pos, std::vector<std::pair<Vec2, Vec2>>& out) {
    auto cut = [&](int i0, int j0, int i1, int j1) {
        double a = val(i0, j0), b = val(i1, j1);
        double l = a / (a - b);
        return lerp(pos(i0, j0), pos(i1, j1), l);
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            // corners in cyclic order
            int ci[4] = {i, i + 1, i + 1, i}, cj[4] = {j, j, j + 1, j + 1};
            std::vector<Vec2> hits;
            for (int k = 0; k < 4; ++k) {
                int k2 = (k + 1) % 4;
                double a = val(ci[k], cj[k]), b = val(ci[k2], cj[k2]);
                if ((a > 0) != (b > 0)) hits.push_back(cut(ci[k], cj[k], ci[k2], cj[k2]));
            }
            if (hits.size() == 2) out.push_back({hits[0], hits[1]});
            if (hits.size() == 4) {
                double center = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
                bool c0 = val(i, j) > 0;
                if ((center > 0) == c0) {
                    out.push_back({hits[0], hits[3]});
                    out.push_back({hits[1], hits[2]});
                } else {
                    out.push_back({hits[0], hits[1]});
                    out.push_back({hits[2], hits[3]});
                }
            }
        }
}

struct View {
    Vec2 lo, hi;
    double ox, oy, scale;
    Vec2 map(Vec2 p) const { return {ox + (p.x - lo.x) * scale, oy + (hi.y - p.y) * scale}; }
};

void draw_cell_field(std::string& svg, const CellData& c, int n, const std::function<Vec2(Vec2)>& world) {
    std::vector<Vec2> P((n + 1) * (n + 1)), F((n + 1) * (n + 1));
    auto local_at = [&](int i, int j) {
        double s = static_cast<double>(i) / n, t = static_cast<double>(j) / n;
        if (c.shape == Shape::Triangle) {
            // collapse the square onto the triangle
            return Vec2{s * (1 - t), t};
        }
        return Vec2{s, t};
    };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            Vec2 st = local_at(i, j);
            P[j * (n + 1) + i] = world(from_local(c, st));
            F[j * (n + 1) + i] = interpolate(c, st);
        }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            Vec2 mid = interpolate(c, (local_at(i, j) + local_at(i + 1, j + 1)) * 0.5);
            svg += "<polygon fill=\"" + std::string(area_color(mid)) + "\" stroke=\"none\" points=\"";
            for (auto [a, b] : {std::pair{i, j}, std::pair{i + 1, j}, std::pair{i + 1, j + 1}, std::pair{i, j + 1}}) {
                Vec2 q = P[b * (n + 1) + a];
                svg += fmt(q.x) + "," + fmt(q.y) + " ";
            }
            svg += "\"/>\n";
        }
    for (int comp = 0; comp < 2; ++comp) {
        std::vector<std::pair<Vec2, Vec2>> segs;
        contour(
            n, [&](int i, int j) { return comp == 0 ? F[j * (n + 1) + i].x : F[j * (n + 1) + i].y; },
            [&](int i, int j) { return P[j * (n + 1) + i]; }, segs);
        for (auto [a, b] : segs)
            svg += "<line x1=\"" + fmt(a.x) + "\" y1=\"" + fmt(a.y) + "\" x2=\"" + fmt(b.x) + "\" y2=\"" + fmt(b.y) +
                   "\" stroke=\"" + (comp == 0 ? "#222" : "#555") + "\" stroke-width=\"1\"" +
                   (comp == 1 ? " stroke-dasharray=\"3,2\"" : "") + "/>\n";
    }
}

std::string glyph(Vec2 p, int index, int order) {
    std::string x = fmt(p.x), y = fmt(p.y);
    if (order != 1 || index == 0)
        return "<polygon fill=\"#f29b1d\" stroke=\"#000\" stroke-width=\"0.5\" points=\"" + fmt(p.x) + "," +
               fmt(p.y - 5) + " " + fmt(p.x + 5) + "," + y + " " + x + "," + fmt(p.y + 5) + " " + fmt(p.x - 5) + "," + y +
               "\"/>\n";
    if (index == -1)
        return "<rect x=\"" + fmt(p.x - 4) + "\" y=\"" + fmt(p.y - 4) + "\" width=\"8\" height=\"8\" fill=\"#d62728\" " +
               "stroke=\"#000\" stroke-width=\"0.5\"/>\n";
    if (index == 1)
        return "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"4\" fill=\"#1f77b4\" stroke=\"#000\" stroke-width=\"0.5\"/>\n";
    return "<polygon fill=\"#9467bd\" stroke=\"#000\" stroke-width=\"0.5\" points=\"" + x + "," + fmt(p.y - 5) + " " +
           fmt(p.x + 5) + "," + fmt(p.y + 4) + " " + fmt(p.x - 5) + "," + fmt(p.y + 4) + "\"/>\n";
}

}  // namespace

std::string render_svg(const nlohmann::json& j, const Field* field) {
    const auto& dom = j.at("domain");
    Vec2 lo = to_vec(dom.at("bounds").at(0)), hi = to_vec(dom.at("bounds").at(1));
    bool px = dom.at("periodic").at(0).get<bool>(), py = dom.at("periodic").at(1).get<bool>();
    const double main_w = 800, margin = 20;
    double w = std::max(hi.x - lo.x, 1e-300), h = std::max(hi.y - lo.y, 1e-300);
    double scale = main_w / w;
    if (h * scale > 800) scale = 800 / h;
    View v{lo, hi, margin, margin, scale};
    const auto& insets = j.contains("insets") ? j.at("insets") : json::array();
    const std::size_t max_insets = 6;
    std::size_t n_insets = std::min(insets.size(), max_insets);
    const double inset_size = 160;
    double width = margin * 2 + w * scale + (n_insets ? inset_size + margin : 0);
    double height = std::max(margin * 2 + h * scale, n_insets * (inset_size + margin) + margin);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
           "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" fill=\"#fff\"/>\n";

    if (field) {
        int n = std::clamp(static_cast<int>(std::sqrt(200000.0 / std::max(1, field->cell_count()))), 2, 8);
        for (int i = 0; i < field->cell_count(); ++i)
            draw_cell_field(svg, field->cell(i), n, [&](Vec2 p) { return v.map(p); });
    }

    // grid
    svg += "<g stroke=\"#bbb\" stroke-width=\"0.5\" fill=\"none\">\n";
    if (dom.contains("grid")) {
        const auto& g = dom.at("grid");
        int W = g.at("W"), H = g.at("H");
        Vec2 o = to_vec(g.at("origin")), s = to_vec(g.at("spacing"));
        int nx = px ? W : W - 1, ny = py ? H : H - 1;
        if (nx * ny <= 40000) {
            for (int i = 0; i <= nx; ++i) {
                Vec2 a = v.map({o.x + i * s.x, o.y}), b = v.map({o.x + i * s.x, o.y + ny * s.y});
                svg += "<line x1=\"" + fmt(a.x) + "\" y1=\"" + fmt(a.y) + "\" x2=\"" + fmt(b.x) + "\" y2=\"" + fmt(b.y) + "\"/>\n";
            }
            for (int k = 0; k <= ny; ++k) {
                Vec2 a = v.map({o.x, o.y + k * s.y}), b = v.map({o.x + nx * s.x, o.y + k * s.y});
                svg += "<line x1=\"" + fmt(a.x) + "\" y1=\"" + fmt(a.y) + "\" x2=\"" + fmt(b.x) + "\" y2=\"" + fmt(b.y) + "\"/>\n";
            }
        }
    } else if (dom.contains("cells")) {
        for (const auto& poly : dom.at("cells")) {
            svg += "<polygon points=\"";
            for (const auto& p : poly) {
                Vec2 q = v.map(to_vec(p));
                svg += fmt(q.x) + "," + fmt(q.y) + " ";
            }
            svg += "\"/>\n";
        }
    }
    Vec2 a = v.map({lo.x, hi.y}), b = v.map({hi.x, lo.y});
    svg += "<rect x=\"" + fmt(a.x) + "\" y=\"" + fmt(a.y) + "\" width=\"" + fmt(b.x - a.x) + "\" height=\"" +
           fmt(b.y - a.y) + "\" stroke=\"#666\"/>\n</g>\n";

    // separatrices, wrapped into the domain on periodic axes
    Vec2 period{px ? hi.x - lo.x : 0, py ? hi.y - lo.y : 0};
    auto wrap = [&](Vec2 p) {
        if (period.x > 0) p.x = lo.x + std::fmod(std::fmod(p.x - lo.x, period.x) + period.x, period.x);
        if (period.y > 0) p.y = lo.y + std::fmod(std::fmod(p.y - lo.y, period.y) + period.y, period.y);
        return p;
    };
    svg += "<g fill=\"none\" stroke=\"#1a5fb4\" stroke-width=\"1.2\">\n";
    for (const auto& s : j.at("separatrices")) {
        std::string cur;
        Vec2 prev;
        bool first = true;
        auto flush = [&]() {
            if (!cur.empty()) svg += "<polyline points=\"" + cur + "\"/>\n";
            cur.clear();
        };
        for (const auto& p : s.at("points")) {
            Vec2 q = wrap(to_vec(p));
            if (!first && ((period.x > 0 && std::abs(q.x - prev.x) > 0.5 * period.x) ||
                           (period.y > 0 && std::abs(q.y - prev.y) > 0.5 * period.y)))
                flush();
            Vec2 m = v.map(q);
            cur += fmt(m.x) + "," + fmt(m.y) + " ";
            prev = q;
            first = false;
        }
        flush();
    }
    svg += "</g>\n";

    for (const auto& sc : j.at("super_cells")) {
        svg += "<polygon fill=\"none\" stroke=\"#9467bd\" stroke-dasharray=\"4,2\" points=\"";
        for (const auto& p : sc.at("boundary")) {
            Vec2 q = v.map(wrap(to_vec(p)));
            svg += fmt(q.x) + "," + fmt(q.y) + " ";
        }
        svg += "\"/>\n";
    }
    for (const auto& cp : j.at("critical_points"))
        svg += glyph(v.map(wrap(to_vec(cp.at("position")))), cp.at("index").get<int>(), cp.at("order").get<int>());

    // insets: single cell in local coordinates
    for (std::size_t k = 0; k < n_insets; ++k) {
        const auto& in = insets.at(k);
        double x0 = margin * 2 + w * scale, y0 = margin + k * (inset_size + margin);
        CellData c;
        c.shape = in.at("shape").get<std::string>() == "tri" ? Shape::Triangle : Shape::Quad;
        for (int q = 0; q < c.size(); ++q) c.val[q] = to_vec(in.at("values").at(q));
        static const Vec2 quad[4] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
        static const Vec2 tri[3] = {{0, 0}, {0, 1}, {1, 0}};
        for (int q = 0; q < c.size(); ++q) c.pos[q] = c.shape == Shape::Quad ? quad[q] : tri[q];
        View iv{{0, 0}, {1, 1}, x0, y0, inset_size};
        draw_cell_field(svg, c, 48, [&](Vec2 p) { return iv.map(p); });
        svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(inset_size) + "\" height=\"" +
               fmt(inset_size) + "\" fill=\"none\" stroke=\"#000\"/>\n";
        for (const auto& cp : in.at("critical_points"))
            svg += glyph(iv.map(to_vec(cp.at("local"))), cp.at("index").get<int>(), cp.at("order").get<int>());
        svg += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(y0 + inset_size + 12) +
               "\" font-size=\"10\" font-family=\"sans-serif\">cell " + std::to_string(in.at("cell").get<int>()) + " (" +
               in.at("kind").get<std::string>() + ")</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace vftop
