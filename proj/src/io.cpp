/**
 * @file io.cpp
 * @copyright 2026. This software may be modified and distributed under the
 * terms of the BSD-3-Clause license.
 */

#include <frictionid/io.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace frictionid::io
{

std::size_t Table::rows() const
{
    return columns.empty() ? 0 : columns.front().size();
}

const std::vector<double>& Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
    {
        if (header[i] == name)
            return columns[i];
    }
    throw std::out_of_range("missing column '" + std::string(name) + "'");
}

std::string formatDouble(double value)
{
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string toCsv(const Table& table, const Provenance& provenance)
{
    if (table.header.size() != table.columns.size())
        throw std::invalid_argument("toCsv: header/column count mismatch");
    const std::size_t n = table.rows();
    for (const auto& c : table.columns)
    {
        if (c.size() != n)
            throw std::invalid_argument("toCsv: ragged columns");
    }

    std::string out;
    out.reserve((n + 2) * table.columns.size() * 20);
    if (!provenance.empty())
    {
        out += "# config_hash=" + provenance.configHash
               + " seed=" + std::to_string(provenance.seed) + "\n";
    }
    for (std::size_t c = 0; c < table.header.size(); ++c)
    {
        if (c)
            out += ',';
        out += table.header[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < n; ++r)
    {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
        {
            if (c)
                out += ',';
            out += formatDouble(table.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

Table parseCsv(std::string_view text)
{
    Table table;
    bool haveHeader = false;
    std::size_t pos = 0;
    std::size_t lineNo = 0;
    while (pos < text.size())
    {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++lineNo;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true)
        {
            const std::size_t comma = line.find(',', start);
            fields.emplace_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }

        if (!haveHeader)
        {
            table.header = std::move(fields);
            table.columns.resize(table.header.size());
            haveHeader = true;
            continue;
        }
        if (fields.size() != table.header.size())
        {
            throw std::runtime_error("CSV line " + std::to_string(lineNo) + ": expected "
                                     + std::to_string(table.header.size()) + " fields");
        }
        for (std::size_t c = 0; c < fields.size(); ++c)
        {
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(fields[c], &used);
            } catch (const std::exception&)
            {
                used = 0;
            }
            if (used != fields[c].size() || fields[c].empty())
            {
                throw std::runtime_error("CSV line " + std::to_string(lineNo)
                                         + ": bad number '" + fields[c] + "'");
            }
            table.columns[c].push_back(v);
        }
    }
    if (!haveHeader)
        throw std::runtime_error("CSV: missing header");
    return table;
}

void writeText(const std::filesystem::path& path, std::string_view text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string readText(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeCsv(const std::filesystem::path& path, const Table& table, const Provenance& provenance)
{
    writeText(path, toCsv(table, provenance));
}

Table readCsv(const std::filesystem::path& path)
{
    return parseCsv(readText(path));
}

void writeJson(const std::filesystem::path& path, const nlohmann::json& j)
{
    writeText(path, j.dump(2) + "\n");
}

nlohmann::json readJson(const std::filesystem::path& path)
{
    return nlohmann::json::parse(readText(path));
}

std::string fnv1aHex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

} // namespace frictionid::io
