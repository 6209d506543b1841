#include "mqcavity/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mqcavity/errors.hpp"

#ifndef MQCAVITY_VERSION
#define MQCAVITY_VERSION "0.0.0"
#endif

namespace mqc {

std::string toolVersion()
{
    return MQCAVITY_VERSION;
}

std::string formatValue(double v)
{
    if (v == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string tableToCsv(const Table& t)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw Error("table " + t.name + " has a ragged row");
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << formatValue(row[i]);
        os << '\n';
    }
    return os.str();
}

namespace {

void writeFile(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    out.close();
    if (!out) throw IoError("failed writing " + path);
}

} // namespace

void writeCsv(const Table& t, const std::string& path, const std::string& metadata_json)
{
    const std::string csv = tableToCsv(t);
    writeFile(path, csv);
    writeFile(path + ".meta.json", metadata_json);
}

} // namespace mqc
