#pragma once

// Field files: one JSON header line with keys n, origin, extent, cells, name,
// followed by the node values in row-major order. A ".bin" path stores raw
// little-endian float64 values after the header line; anything else stores one
// decimal value per line.

#include <string>

#include <json.hpp>

#include "plap/grid.hpp"

namespace plap {

struct NamedField {
    std::string name;
    ScalarField field;
};

nlohmann::json domain_header(const GridDomain& domain, const std::string& name);
GridDomain domain_from_header(const nlohmann::json& header);

void write_field(const std::string& path, const ScalarField& field, const std::string& name);
NamedField read_field(const std::string& path);

/// Decimal text that round-trips a double exactly.
std::string format_double(double v);

} // namespace plap
