#include "fbrk/errors.hpp"
#include "fbrk/swe_planar.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace fbrk {

namespace {

static_assert(std::endian::native == std::endian::little, "binary snapshots assume a little-endian host");

constexpr std::array<char, 4> kMagic{'S', 'W', 'E', 'P'};

void put_u32(std::ostream& out, std::uint32_t x) {
    char b[4];
    std::memcpy(b, &x, 4);
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    char b[4];
    if (!in.read(b, 4)) throw DomainError("snapshot: truncated header");
    std::uint32_t x;
    std::memcpy(&x, b, 4);
    return x;
}

const Field& field_of(const SWEState& s, int k) { return k == 0 ? s.h : (k == 1 ? s.u : s.v); }
Field& field_of(SWEState& s, int k) { return k == 0 ? s.h : (k == 1 ? s.u : s.v); }

constexpr const char* kNames[3] = {"h", "u", "v"};

} // namespace

void write_snapshot_csv(std::ostream& out, const SWEState& s) {
    out << "field,i,j,value\n";
    out.precision(17);
    for (int k = 0; k < 3; ++k) {
        const Field& f = field_of(s, k);
        for (int j = 0; j < f.ny(); ++j)
            for (int i = 0; i < f.nx(); ++i) out << kNames[k] << ',' << i << ',' << j << ',' << f(i, j) << '\n';
    }
}

SWEState read_snapshot_csv(std::istream& in, const Grid& grid) {
    grid.validate();
    SWEState s{Field(grid), Field(grid), Field(grid)};
    std::vector<char> seen(3 * grid.size(), 0);
    std::string line;
    if (!std::getline(in, line) || line != "field,i,j,value") throw DomainError("snapshot csv: bad header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string name, si, sj, sv;
        if (!std::getline(row, name, ',') || !std::getline(row, si, ',') || !std::getline(row, sj, ',') ||
            !std::getline(row, sv))
            throw DomainError("snapshot csv: malformed row '" + line + "'");
        int k = -1;
        for (int c = 0; c < 3; ++c)
            if (name == kNames[c]) k = c;
        if (k < 0) throw DomainError("snapshot csv: unknown field '" + name + "'");
        int i = 0, j = 0;
        double value = 0.0;
        try {
            i = std::stoi(si);
            j = std::stoi(sj);
            value = std::stod(sv);
        } catch (const std::exception&) {
            throw DomainError("snapshot csv: malformed row '" + line + "'");
        }
        if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) throw DomainError("snapshot csv: index out of range");
        field_of(s, k)(i, j) = value;
        seen[static_cast<std::size_t>(k) * grid.size() + static_cast<std::size_t>(j) * grid.nx + i] = 1;
    }
    for (char c : seen)
        if (!c) throw DomainError("snapshot csv: missing entries");
    return s;
}

void write_snapshot_binary(std::ostream& out, const SWEState& s) {
    out.write(kMagic.data(), 4);
    put_u32(out, static_cast<std::uint32_t>(s.h.nx()));
    put_u32(out, static_cast<std::uint32_t>(s.h.ny()));
    put_u32(out, 3);
    for (int k = 0; k < 3; ++k) {
        const auto& d = field_of(s, k).data();
        out.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
    }
}

SWEState read_snapshot_binary(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != kMagic) throw DomainError("snapshot: bad magic");
    const std::uint32_t nx = get_u32(in), ny = get_u32(in), count = get_u32(in);
    if (count != 3) throw DomainError("snapshot: expected 3 fields");
    if (nx == 0 || ny == 0 || nx > (1u << 15) || ny > (1u << 15)) throw DomainError("snapshot: bad dimensions");
    SWEState s{Field(static_cast<int>(nx), static_cast<int>(ny)), Field(static_cast<int>(nx), static_cast<int>(ny)),
               Field(static_cast<int>(nx), static_cast<int>(ny))};
    for (int k = 0; k < 3; ++k) {
        auto& d = field_of(s, k).data();
        if (!in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double))))
            throw DomainError("snapshot: truncated data");
    }
    return s;
}

void planar_from_json(const nlohmann::json& j, Grid& grid, SWEConfig& config) {
    if (!j.is_object()) throw DomainError("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "nx") grid.nx = value.get<int>();
            else if (key == "ny") grid.ny = value.get<int>();
            else if (key == "dx") grid.dx = value.get<double>();
            else if (key == "dy") grid.dy = value.get<double>();
            else if (key == "g") config.g = value.get<double>();
            else if (key == "f") config.f = value.get<double>();
            else if (key == "H") config.H = value.get<double>();
            else if (key == "momentum_advection") config.momentum_advection = value.get<bool>();
            else throw DomainError("config: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw DomainError("config: wrong type for key '" + key + "'");
        }
    }
    grid.validate();
    config.validate(grid);
}

nlohmann::ordered_json planar_to_json(const Grid& grid, const SWEConfig& config) {
    return {{"nx", grid.nx}, {"ny", grid.ny}, {"dx", grid.dx}, {"dy", grid.dy}, {"g", config.g},
            {"f", config.f}, {"H", config.H}, {"momentum_advection", config.momentum_advection}};
}

} // namespace fbrk
