#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace qeflab::cli {

/// CSV writer with a fixed header, '.' decimals and 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(unsigned long long value);
  CsvWriter& field(const std::string& value);
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t pending_ = 0;
};

std::string format_double(double value);

}  // namespace qeflab::cli
