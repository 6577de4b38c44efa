#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace presscheck::util {

/// SHA-256 of `data`, as 64 lowercase hex characters.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split_lines(std::string_view text);

/// Whitespace-delimited token count.
std::size_t word_count(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

bool starts_with_icase(std::string_view text, std::string_view prefix);

/// Fixed-notation formatting with `digits` decimals, locale-independent.
std::string fmt_double(double value, int digits);

/// Runs fn(i) for i in [0, n) on up to max_in_flight worker threads.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t max_in_flight,
                  const std::function<void(std::size_t)>& fn);

/// One row of a delimited table. Fields are quoted as needed on write.
using CsvRow = std::vector<std::string>;

std::string csv_encode(const std::vector<CsvRow>& rows);
std::vector<CsvRow> csv_decode(std::string_view text);

}  // namespace presscheck::util
