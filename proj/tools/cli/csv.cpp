#include "csv.hpp"

#include <cstdio>

#include "qeflab/error.hpp"

namespace qeflab::cli {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) fail(ErrorCode::InvalidArgument, "cannot open " + path.string() + " for writing");
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::separator() {
  if (pending_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::field(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::field(long long value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::field(unsigned long long value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::field(const std::string& value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  if (pending_ != columns_) fail(ErrorCode::InvalidArgument, "csv row width differs from header");
  out_ << '\n';
  pending_ = 0;
}

}  // namespace qeflab::cli
