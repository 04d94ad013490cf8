// SPDX-License-Identifier: Apache-2.0

#include "glfem/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include "glfem/errors.hpp"

namespace glfem
{

std::string format_double(double value)
{
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what)
{
  double value = 0.0;
  const char *first = text.data(), *last = text.data() + text.size();
  if (!text.empty() && *first == '+')
  {
    ++first;
  }
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
  {
    throw FormatError(std::string(what) + ": cannot parse '" + std::string(text) +
                      "' as a number");
  }
  return value;
}

void write_file_atomic(const std::string &path, const std::string &contents)
{
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
    {
      throw Error("cannot open '" + tmp + "' for writing");
    }
    out << contents;
    out.flush();
    if (!out)
    {
      throw Error("write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
  {
    std::remove(tmp.c_str());
    throw Error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

}  // namespace glfem
