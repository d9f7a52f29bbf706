#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "polyrlt/problem.hpp"

namespace polyrlt {

// Reads the line-oriented instance format:
//
//   # comment
//   var NAME >= NUM <= NUM [integer|binary]
//   min|max POLY
//   st NAME: POLY (>=|<=|=) NUM
//
// `var NAME binary` may omit the bounds. Constraints are normalized to >= or
// =, and a max objective is stored negated. Throws ParseError with the line
// number on malformed input.
Problem parse_instance(std::string_view text, std::string name = "");

Problem load_instance(const std::filesystem::path& path);

// Text that parses back to an identical Problem.
std::string serialize_instance(const Problem& problem);

}  // namespace polyrlt
