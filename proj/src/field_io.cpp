#include "plap/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "plap/error.hpp"

namespace plap {

namespace {

bool is_binary(const std::string& path)
{
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
}

} // namespace

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json domain_header(const GridDomain& d, const std::string& name)
{
    nlohmann::json h;
    h["n"] = d.dim();
    std::vector<double> origin, extent;
    std::vector<int> cells;
    for (int a = 0; a < d.dim(); ++a) {
        origin.push_back(d.origin()[a]);
        extent.push_back(d.extent()[a]);
        cells.push_back(d.cells(a));
    }
    h["origin"] = origin;
    h["extent"] = extent;
    h["cells"] = cells;
    h["name"] = name;
    return h;
}

GridDomain domain_from_header(const nlohmann::json& h)
{
    try {
        const int n = h.at("n").get<int>();
        const auto origin = h.at("origin").get<std::vector<double>>();
        const auto extent = h.at("extent").get<std::vector<double>>();
        const auto cells = h.at("cells").get<std::vector<int>>();
        if (static_cast<int>(origin.size()) != n || static_cast<int>(extent.size()) != n ||
            static_cast<int>(cells.size()) != n)
            throw IoError("field header arrays must have n entries");
        Point o{}, e{};
        Index3 c{};
        for (int a = 0; a < n; ++a) {
            o[a] = origin[a];
            e[a] = extent[a];
            c[a] = cells[a];
        }
        return GridDomain(n, o, e, c);
    } catch (const nlohmann::json::exception& ex) {
        throw IoError(std::string("malformed field header: ") + ex.what());
    }
}

void write_field(const std::string& path, const ScalarField& field, const std::string& name)
{
    static_assert(std::endian::native == std::endian::little, "binary field files assume little-endian hosts");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << domain_header(field.domain(), name).dump() << '\n';
    if (is_binary(path)) {
        const auto v = field.values();
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double v : field.values()) out << format_double(v) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

NamedField read_field(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("missing header in " + path);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
        throw IoError("malformed field header in " + path + ": " + ex.what());
    }
    GridDomain d = domain_from_header(h);
    std::vector<double> values(d.node_count());
    if (is_binary(path)) {
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
            throw IoError("truncated binary field " + path);
    } else {
        for (auto& v : values) {
            if (!std::getline(in, line)) throw IoError("truncated field " + path);
            try {
                v = std::stod(line);
            } catch (const std::exception&) {
                throw IoError("bad value '" + line + "' in " + path);
            }
        }
    }
    return {h.value("name", std::string{}), ScalarField(d, std::move(values))};
}

} // namespace plap
