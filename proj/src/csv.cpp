#include "mgems/csv.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace mgems::csv {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      auto hash = cur.find('#');
      if (hash != std::string::npos) cur.erase(hash);
      cur = trim(cur);
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (text[i] != '\r') {
      cur.push_back(text[i]);
    }
  }
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(line[i]);
    }
  }
  return out;
}

double parse_double(const std::string& token, const std::string& context) {
  if (token.empty()) throw CsvError(context + ": empty numeric field");
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size())
    throw CsvError(context + ": not a number: '" + token + "'");
  return v;
}

long parse_long(const std::string& token, const std::string& context) {
  if (token.empty()) throw CsvError(context + ": empty integer field");
  char* end = nullptr;
  long v = std::strtol(token.c_str(), &end, 10);
  if (end != token.c_str() + token.size())
    throw CsvError(context + ": not an integer: '" + token + "'");
  return v;
}

bool is_header(const std::string& line) {
  auto f = fields(line);
  if (f.empty() || f[0].empty()) return false;
  char* end = nullptr;
  std::strtod(f[0].c_str(), &end);
  return end != f[0].c_str() + f[0].size();
}

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

}  // namespace mgems::csv
