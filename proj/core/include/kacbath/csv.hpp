#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace kacbath {

/// Shortest-form text for x with 17 significant digits, '.' as decimal
/// separator regardless of the process locale.
std::string format_real(double x);

/// Comma-separated rows with a fixed header. Fields are not quoted, so
/// they must not contain commas or newlines (ContractError otherwise).
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& add(double x);
  CsvWriter& add(std::int64_t x);
  CsvWriter& add(int x) { return add(static_cast<std::int64_t>(x)); }
  CsvWriter& add(std::string_view s);
  void end_row();

 private:
  void sep();

  std::ostream& out_;
  size_t columns_;
  size_t filled_ = 0;
};

/// Writes `content` to `path` (creating parent directories). IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace kacbath
