/**
 * @file io.hpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#ifndef FRICTIONID_IO_HPP
#define FRICTIONID_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace frictionid::io
{

/// Provenance stamped into every artifact written by the pipeline.
struct Provenance
{
    std::string configHash;
    std::uint64_t seed{0};

    bool empty() const
    {
        return configHash.empty();
    }
};

/**
 * Column-major numeric table. Lines starting with '#' in a CSV file are
 * metadata comments and are skipped on read.
 */
struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const;
    const std::vector<double>& column(std::string_view name) const;
};

/// Formats with 17 significant digits ("%.17g"), which round-trips doubles.
std::string formatDouble(double value);

std::string toCsv(const Table& table, const Provenance& provenance = {});
Table parseCsv(std::string_view text);

void writeText(const std::filesystem::path& path, std::string_view text);
std::string readText(const std::filesystem::path& path);

void writeCsv(const std::filesystem::path& path,
              const Table& table,
              const Provenance& provenance = {});
Table readCsv(const std::filesystem::path& path);

void writeJson(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json readJson(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1aHex(std::string_view bytes);

} // namespace frictionid::io

#endif // FRICTIONID_IO_HPP
