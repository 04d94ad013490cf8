// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_IO_HPP
#define GLFEM_IO_HPP

#include <string>
#include <string_view>

namespace glfem
{

// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

// Strict parse of a full string as a double; throws FormatError naming `what`.
double parse_double(std::string_view text, std::string_view what);

// Writes to "<path>.tmp" then renames over path.
void write_file_atomic(const std::string &path, const std::string &contents);

}  // namespace glfem

#endif  // GLFEM_IO_HPP
