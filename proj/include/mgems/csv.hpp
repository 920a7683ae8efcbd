// Minimal CSV helpers shared by the series loaders and trace writers.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mgems::csv {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits text into non-empty trimmed lines; '#' starts a comment.
std::vector<std::string> lines(const std::string& text);

// Splits one line on commas, trimming surrounding whitespace per field.
std::vector<std::string> fields(const std::string& line);

// Strict double/long parsers; throw CsvError with the offending token.
double parse_double(const std::string& token, const std::string& context);
long parse_long(const std::string& token, const std::string& context);

// True if the line looks like a header (first field is not a number).
bool is_header(const std::string& line);

// Fixed 6-decimal formatting used by every trace file.
std::string format_fixed(double value);

}  // namespace mgems::csv
