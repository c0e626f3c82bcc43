#pragma once

#include <iosfwd>
#include <span>

#include "json.hpp"
#include "parastep/geometry.hpp"

namespace parastep {

// Text grid format:
//
//   parastep-meshfunction n=<n> h=<h> N=<N> lower=<a,b,..> upper=<c,d,..> T=<T>
//   <i_1> ... <i_n> <j> <value>
//   ...
//
// One line per node in linear order; t = j h^2. Doubles are written with 17
// significant digits so a read-back is exact.
void write_mesh_function(std::ostream& out, const MeshFunction& u);
MeshFunction read_mesh_function(std::istream& in);

// Same layout with a 0/1 column instead of values.
void write_mesh_mask(std::ostream& out, const MeshSpec& spec, std::span<const char> mask);

nlohmann::json mesh_spec_to_json(const MeshSpec& spec);
MeshSpec mesh_spec_from_json(const nlohmann::json& j);
nlohmann::json mesh_function_to_json(const MeshFunction& u);
MeshFunction mesh_function_from_json(const nlohmann::json& j);

}  // namespace parastep
