#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace latren {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

using Cell = std::variant<double, std::int64_t, std::string>;

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add(std::vector<Cell> row);
  std::size_t size() const { return rows_.size(); }
  std::string to_csv() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// Little-endian float64 array plus `<path>.json` sidecar.
void write_samples(const std::filesystem::path& path, const std::vector<double>& samples,
                   const nlohmann::json& sidecar);
std::vector<double> read_samples(const std::filesystem::path& path);

/// Empirical CDF at up to `max_points` order statistics of sorted samples.
Table ecdf_table(const std::vector<double>& sorted, std::size_t max_points = 10000);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace latren
