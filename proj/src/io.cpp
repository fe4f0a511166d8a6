#include "latren/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "latren/error.hpp"

namespace latren {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw Error(Errc::InvalidArgument, "row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) out += format_double(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(v);
            else out += v;
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

void Table::write(const std::filesystem::path& path) const { write_text(path, to_csv()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
}

void write_samples(const std::filesystem::path& path, const std::vector<double>& samples,
                   const nlohmann::json& sidecar) {
  std::string bytes(samples.size() * 8, '\0');
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(samples[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  write_text(path, bytes);
  auto meta = sidecar;
  meta["count"] = samples.size();
  meta["format"] = "float64-le";
  write_text(path.string() + ".json", meta.dump(2) + "\n");
}

std::vector<double> read_samples(const std::filesystem::path& path) {
  const auto bytes = read_text(path);
  if (bytes.size() % 8 != 0) throw Error(Errc::IoError, path.string() + " is not a float64 array");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

Table ecdf_table(const std::vector<double>& sorted, std::size_t max_points) {
  Table t({"x", "ecdf"});
  const std::size_t n = sorted.size();
  if (n == 0) return t;
  const std::size_t step = std::max<std::size_t>(1, n / max_points);
  bool have_last = false;
  double last = 0.0;
  for (std::size_t i = step - 1; i < n; i += step) {
    if (have_last && sorted[i] == last) continue;
    // last index of the run of equal values, so the ECDF is right-continuous
    const auto run_end = std::upper_bound(sorted.begin() + static_cast<std::ptrdiff_t>(i), sorted.end(), sorted[i]);
    t.add({sorted[i], static_cast<double>(run_end - sorted.begin()) / static_cast<double>(n)});
    last = sorted[i];
    have_last = true;
  }
  return t;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::IoError, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace latren
