#include "kacbath/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "kacbath/errors.hpp"

namespace kacbath {

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
  for (const auto& h : header) add(std::string_view(h));
  end_row();
}

void CsvWriter::sep() {
  if (filled_ >= columns_) throw ContractError("CsvWriter: too many fields in row");
  if (filled_ > 0) out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::add(double x) {
  sep();
  out_ << format_real(x);
  return *this;
}

CsvWriter& CsvWriter::add(std::int64_t x) {
  sep();
  char buf[24];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  out_.write(buf, r.ptr - buf);
  return *this;
}

CsvWriter& CsvWriter::add(std::string_view s) {
  if (s.find_first_of(",\n\r") != std::string_view::npos) throw ContractError("CsvWriter: field contains a separator");
  sep();
  out_ << s;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw ContractError("CsvWriter: row has the wrong number of fields");
  out_ << '\n';
  filled_ = 0;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kacbath
