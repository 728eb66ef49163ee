#pragma once

// nlohmann::json conversions shared by the *_io sources. Not installed.

#include "liesynth/bracket_tree.hpp"
#include "liesynth/error.hpp"
#include "liesynth/sampling.hpp"
#include "liesynth/vector_field.hpp"

#include "json.hpp"

#include <string>
#include <string_view>

namespace liesynth::detail {

using json = nlohmann::ordered_json;

json parse_json(std::string_view text);

json field_to_json(const VectorField& f);
VectorField field_from_json(const json& j);

json tree_to_json(const BracketTree& t);
BracketTree tree_from_json(const json& j);

json domain_to_json(const Domain& d);
Domain domain_from_json(const json& j, int dimension);

/// Doubles print in shortest round-trip form; non-finite values become strings.
json number_json(double x);
double number_from_json(const json& j);

[[noreturn]] void malformed(const std::string& what);

}  // namespace liesynth::detail
