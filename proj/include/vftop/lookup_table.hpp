#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "vftop/coloring.hpp"

namespace vftop {

enum class ClassKind : std::uint8_t { NoCriticalPoint, OneCP, TwoCP, ValueDependent };
std::string class_kind_name(ClassKind k);

struct ClassRecord {
    int id = 0;  // 1-based, 0 is reserved for Invalid
    ClassKind kind = ClassKind::NoCriticalPoint;
    int index = 0;  // OneCP only
    CellColoring representative;
    int orbit_size = 0;
};

// outcome of one double-edge configuration (or of a cell without saddle components)
struct ConfigOutcome {
    enum Kind { None, ValueDependent, Crossings } kind = None;
    int count = 0;
    std::vector<int> indices;
    bool operator==(const ConfigOutcome&) const = default;
};

ConfigOutcome classify_config(const ZeroValueSequence& seq, const ReductionContext& ctx);
ClassRecord classify_orbit(const CellColoring& rep);

struct OrbitCensus {
    int total = 0;
    int invalid = 0;
    std::vector<int> size_histogram;  // orbit size -> count
};

std::vector<ClassRecord> enumerate_orbits(Shape shape, OrbitCensus* census = nullptr);

struct ClassCounts {
    int none = 0, one_minus = 0, one_plus = 0, two = 0, value_dependent = 0;
    int cp_bearing() const { return one_minus + one_plus + two + value_dependent; }
};

class LookupTable {
public:
    static constexpr std::uint8_t kInvalid = 0;

    LookupTable() = default;
    LookupTable(Shape shape, std::vector<std::uint8_t> tags, std::vector<ClassRecord> classes);

    Shape shape() const { return shape_; }
    const std::vector<ClassRecord>& classes() const { return classes_; }
    const std::vector<std::uint8_t>& tags() const { return tags_; }
    std::uint8_t tag(const CellColoring& t) const { return tags_[t.key()]; }
    // throws InvalidColoring on the Invalid marker
    const ClassRecord& lookup(const CellColoring& t) const;
    ClassCounts counts() const;

    void serialize(std::ostream& os) const;
    static LookupTable deserialize(std::istream& is);
    nlohmann::json atlas() const;

private:
    Shape shape_ = Shape::Triangle;
    std::vector<std::uint8_t> tags_;
    std::vector<ClassRecord> classes_;
};

LookupTable build_lookup_table(Shape shape);
void check_class_counts(const LookupTable& table);

// process-wide tables; loaded from VFTOP_TABLE_DIR when present, built otherwise
const LookupTable& default_table(Shape shape);
std::string table_file_name(Shape shape);

}  // namespace vftop
