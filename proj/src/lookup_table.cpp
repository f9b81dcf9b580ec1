#include "vftop/lookup_table.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>

#include "vftop/errors.hpp"

namespace vftop {

std::string class_kind_name(ClassKind k) {
    switch (k) {
        case ClassKind::NoCriticalPoint: return "none";
        case ClassKind::OneCP: return "one";
        case ClassKind::TwoCP: return "two";
        case ClassKind::ValueDependent: return "value-dependent";
    }
    return "?";
}

ConfigOutcome classify_config(const ZeroValueSequence& seq, const ReductionContext& ctx) {
    auto reduced = reduce_sequence(seq, ctx);
    ConfigOutcome out;
    if (reduced.points.empty()) return out;
    // branches over the reduced sequence keep their pairing
    auto br = sequence_branches(reduced, ctx);
    bool has[2] = {false, false};
    for (const auto& b : br) has[b.component - 1] = true;
    if (!has[0] || !has[1]) return out;
    for (const auto& x : br) {
        if (x.component != 1) continue;
        for (const auto& y : br) {
            if (y.component != 2 || !branches_interleave(x, y)) continue;
            out.indices.push_back(crossing_index(reduced, {x.p, x.q, y.p, y.q}));
        }
    }
    if (out.indices.empty()) {
        out.kind = ConfigOutcome::ValueDependent;
        return out;
    }
    out.kind = ConfigOutcome::Crossings;
    out.count = static_cast<int>(out.indices.size());
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

namespace {

ClassRecord from_outcome(const ConfigOutcome& o, const CellColoring& rep) {
    ClassRecord r;
    r.representative = rep;
    switch (o.kind) {
        case ConfigOutcome::None: r.kind = ClassKind::NoCriticalPoint; break;
        case ConfigOutcome::ValueDependent: r.kind = ClassKind::ValueDependent; break;
        case ConfigOutcome::Crossings:
            if (o.count == 1) {
                r.kind = ClassKind::OneCP;
                r.index = o.indices[0];
            } else {
                r.kind = ClassKind::TwoCP;
            }
            break;
    }
    return r;
}

}  // namespace

ClassRecord classify_orbit(const CellColoring& rep) {
    if (!is_valid_coloring(rep)) throw Error(ErrorCode::InvalidColoring, rep.str());
    auto seq = zero_value_sequence(rep);
    ClassRecord rec;
    if (rep.shape == Shape::Triangle) {
        rec.representative = rep;
        auto sym = seq.symbols();
        if (sym == "abab" || sym == "baba") {
            rec.kind = ClassKind::OneCP;
            rec.index = crossing_index(seq, {0, 1, 2, 3});
        }
    } else {
        auto ctx = reduction_context(rep);
        std::vector<ConfigOutcome> outs;
        auto add = [&](const ConfigOutcome& o) {
            // more than two crossings cannot happen for a bilinear pair
            if (o.kind == ConfigOutcome::Crossings && o.count > 2) return;
            if (std::find(outs.begin(), outs.end(), o) == outs.end()) outs.push_back(o);
        };
        if (ctx.cls[0] == ScalarCellClass::SaddleCell || ctx.cls[1] == ScalarCellClass::SaddleCell) {
            for (const auto& cfg : enumerate_double_edge_configs(rep)) {
                ReductionContext c = ctx;
                c.pairing = cfg.pairing;
                add(classify_config(seq, c));
            }
        } else {
            add(classify_config(seq, ctx));
        }
        if (outs.empty()) throw Error(ErrorCode::ConfigDisagreement, "no feasible configuration for " + rep.str());
        if (outs.size() == 1) {
            rec = from_outcome(outs[0], rep);
        } else {
            for (const auto& o : outs) {
                bool ok = o.kind == ConfigOutcome::None || o.kind == ConfigOutcome::ValueDependent ||
                          (o.kind == ConfigOutcome::Crossings && o.count == 2 && o.indices[0] == -1 &&
                           o.indices[1] == 1);
                if (!ok) throw Error(ErrorCode::ConfigDisagreement, "configurations disagree for " + rep.str());
            }
            rec.representative = rep;
            rec.kind = ClassKind::ValueDependent;
        }
    }
    rec.orbit_size = static_cast<int>(orbit(rep).size());
    return rec;
}

std::vector<ClassRecord> enumerate_orbits(Shape shape, OrbitCensus* census) {
    const std::uint32_t n = key_space(shape);
    std::vector<bool> seen(n, false);
    std::vector<ClassRecord> out;
    OrbitCensus c;
    c.size_histogram.assign(9, 0);
    for (std::uint32_t k = 0; k < n; ++k) {
        if (seen[k]) continue;
        auto o = orbit(CellColoring::from_key(shape, k));
        for (const auto& t : o) seen[t.key()] = true;
        ++c.total;
        ++c.size_histogram[o.size()];
        auto rep = *std::min_element(o.begin(), o.end());
        if (!is_valid_coloring(rep)) {
            ++c.invalid;
            continue;
        }
        out.push_back(classify_orbit(rep));
    }
    std::sort(out.begin(), out.end(),
              [](const ClassRecord& a, const ClassRecord& b) { return a.representative < b.representative; });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i + 1);
    if (census) *census = c;
    return out;
}

LookupTable::LookupTable(Shape shape, std::vector<std::uint8_t> tags, std::vector<ClassRecord> classes)
    : shape_(shape), tags_(std::move(tags)), classes_(std::move(classes)) {
    if (tags_.size() != key_space(shape_)) throw Error(ErrorCode::TableFormat, "tag array size");
    for (auto t : tags_)
        if (t > classes_.size()) throw Error(ErrorCode::TableFormat, "tag out of range");
}

const ClassRecord& LookupTable::lookup(const CellColoring& t) const {
    if (t.shape != shape_) throw Error(ErrorCode::InvalidColoring, "shape mismatch");
    auto tag = tags_[t.key()];
    if (tag == kInvalid) throw Error(ErrorCode::InvalidColoring, t.str());
    return classes_[tag - 1];
}

ClassCounts LookupTable::counts() const {
    ClassCounts c;
    for (const auto& r : classes_) {
        switch (r.kind) {
            case ClassKind::NoCriticalPoint: ++c.none; break;
            case ClassKind::OneCP: (r.index < 0 ? c.one_minus : c.one_plus)++; break;
            case ClassKind::TwoCP: ++c.two; break;
            case ClassKind::ValueDependent: ++c.value_dependent; break;
        }
    }
    return c;
}

namespace {

constexpr char kMagic[5] = {'V', 'F', 'T', 'O', 'P'};
constexpr std::uint8_t kVersion = 1;

void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }
void put_u16(std::ostream& os, std::uint16_t v) {
    put_u8(os, v & 0xff);
    put_u8(os, v >> 8);
}
void put_u32(std::ostream& os, std::uint32_t v) {
    put_u16(os, v & 0xffff);
    put_u16(os, v >> 16);
}
std::uint8_t get_u8(std::istream& is) {
    int c = is.get();
    if (c == std::char_traits<char>::eof()) throw Error(ErrorCode::TableFormat, "truncated table");
    return static_cast<std::uint8_t>(c);
}
std::uint16_t get_u16(std::istream& is) {
    std::uint16_t lo = get_u8(is);
    return static_cast<std::uint16_t>(lo | (get_u8(is) << 8));
}
std::uint32_t get_u32(std::istream& is) {
    std::uint32_t lo = get_u16(is);
    return lo | (static_cast<std::uint32_t>(get_u16(is)) << 16);
}

}  // namespace

void LookupTable::serialize(std::ostream& os) const {
    os.write(kMagic, 5);
    put_u8(os, kVersion);
    put_u8(os, static_cast<std::uint8_t>(shape_));
    put_u32(os, static_cast<std::uint32_t>(tags_.size()));
    os.write(reinterpret_cast<const char*>(tags_.data()), static_cast<std::streamsize>(tags_.size()));
    put_u16(os, static_cast<std::uint16_t>(classes_.size()));
    for (const auto& r : classes_) {
        put_u8(os, static_cast<std::uint8_t>(r.kind));
        put_u8(os, static_cast<std::uint8_t>(static_cast<std::int8_t>(r.index)));
        for (int i = 0; i < r.representative.size(); ++i) put_u8(os, r.representative.colors[i]);
        put_u16(os, static_cast<std::uint16_t>(r.orbit_size));
    }
}

LookupTable LookupTable::deserialize(std::istream& is) {
    char magic[5];
    is.read(magic, 5);
    if (!is || !std::equal(magic, magic + 5, kMagic)) throw Error(ErrorCode::TableFormat, "bad magic");
    if (get_u8(is) != kVersion) throw Error(ErrorCode::TableFormat, "unsupported version");
    auto shape_byte = get_u8(is);
    if (shape_byte != 3 && shape_byte != 4) throw Error(ErrorCode::TableFormat, "bad shape");
    Shape shape = static_cast<Shape>(shape_byte);
    std::uint32_t n = get_u32(is);
    if (n != key_space(shape)) throw Error(ErrorCode::TableFormat, "entry count");
    std::vector<std::uint8_t> tags(n);
    is.read(reinterpret_cast<char*>(tags.data()), n);
    if (!is) throw Error(ErrorCode::TableFormat, "truncated tags");
    std::uint16_t m = get_u16(is);
    std::vector<ClassRecord> classes(m);
    for (std::uint16_t i = 0; i < m; ++i) {
        auto& r = classes[i];
        r.id = i + 1;
        auto kind = get_u8(is);
        if (kind > 3) throw Error(ErrorCode::TableFormat, "bad class kind");
        r.kind = static_cast<ClassKind>(kind);
        r.index = static_cast<std::int8_t>(get_u8(is));
        r.representative.shape = shape;
        for (int k = 0; k < edge_count(shape); ++k) r.representative.colors[k] = get_u8(is);
        r.orbit_size = get_u16(is);
    }
    return LookupTable(shape, std::move(tags), std::move(classes));
}

namespace {

std::vector<int> two_cp_indices(const CellColoring& rep) {
    auto ctx = reduction_context(rep);
    auto seq = zero_value_sequence(rep);
    if (ctx.cls[0] == ScalarCellClass::SaddleCell || ctx.cls[1] == ScalarCellClass::SaddleCell) {
        for (const auto& cfg : enumerate_double_edge_configs(rep)) {
            ReductionContext c = ctx;
            c.pairing = cfg.pairing;
            auto o = classify_config(seq, c);
            if (o.kind == ConfigOutcome::Crossings && o.count == 2) return o.indices;
        }
        return {};
    }
    return classify_config(seq, ctx).indices;
}

}  // namespace

nlohmann::json LookupTable::atlas() const {
    nlohmann::json j;
    j["shape"] = shape_name(shape_);
    auto c = counts();
    j["counts"] = {{"classes", classes_.size()},
                   {"cp_bearing", c.cp_bearing()},
                   {"none", c.none},
                   {"one_index_minus", c.one_minus},
                   {"one_index_plus", c.one_plus},
                   {"two", c.two},
                   {"value_dependent", c.value_dependent}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : classes_) {
        nlohmann::json e;
        e["id"] = r.id;
        std::vector<int> rep(r.representative.colors.begin(),
                             r.representative.colors.begin() + r.representative.size());
        e["representative"] = rep;
        e["orbit_size"] = r.orbit_size;
        e["kind"] = class_kind_name(r.kind);
        if (r.kind == ClassKind::OneCP) e["index"] = r.index;
        if (r.kind == ClassKind::TwoCP) e["indices"] = two_cp_indices(r.representative);
        arr.push_back(e);
    }
    j["classes"] = arr;
    return j;
}

void check_class_counts(const LookupTable& table) {
    auto c = table.counts();
    bool ok;
    std::string expect;
    if (table.shape() == Shape::Triangle) {
        ok = c.one_minus == 4 && c.one_plus == 4 && c.two == 0 && c.value_dependent == 0;
        expect = "8 classes (4 saddle, 4 non-saddle)";
    } else {
        ok = c.one_minus + c.one_plus == 38 && c.two == 4 && c.value_dependent == 32;
        expect = "74 classes (38/4/32)";
    }
    if (!ok)
        throw Error(ErrorCode::ClassCountMismatch,
                    "expected " + expect + ", got one(-1)=" + std::to_string(c.one_minus) +
                        " one(+1)=" + std::to_string(c.one_plus) + " two=" + std::to_string(c.two) +
                        " value-dependent=" + std::to_string(c.value_dependent));
}

LookupTable build_lookup_table(Shape shape) {
    auto classes = enumerate_orbits(shape);
    std::vector<std::uint8_t> tags(key_space(shape), LookupTable::kInvalid);
    for (const auto& r : classes)
        for (const auto& t : orbit(r.representative)) tags[t.key()] = static_cast<std::uint8_t>(r.id);
    LookupTable table(shape, std::move(tags), std::move(classes));
    check_class_counts(table);
    return table;
}

std::string table_file_name(Shape shape) { return "vftop_" + shape_name(shape) + ".bin"; }

namespace {

LookupTable load_or_build(Shape shape) {
    if (const char* dir = std::getenv("VFTOP_TABLE_DIR"); dir && *dir) {
        auto path = std::filesystem::path(dir) / table_file_name(shape);
        std::ifstream in(path, std::ios::binary);
        if (in) {
            auto t = LookupTable::deserialize(in);
            if (t.shape() != shape) throw Error(ErrorCode::TableFormat, path.string() + ": wrong shape");
            check_class_counts(t);
            return t;
        }
    }
    return build_lookup_table(shape);
}

}  // namespace

const LookupTable& default_table(Shape shape) {
    static std::once_flag once[2];
    static LookupTable tables[2];
    int i = shape == Shape::Triangle ? 0 : 1;
    std::call_once(once[i], [&] { tables[i] = load_or_build(shape); });
    return tables[i];
}

}  // namespace vftop
