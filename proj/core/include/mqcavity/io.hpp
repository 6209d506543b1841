#pragma once

#include <string>

#include "mqcavity/experiments.hpp"

namespace mqc {

std::string toolVersion();

// %.12g rendering used for every CSV value.
std::string formatValue(double v);
std::string tableToCsv(const Table& t);

// Writes path and path + ".meta.json". Throws IoError.
void writeCsv(const Table& t, const std::string& path, const std::string& metadata_json);

} // namespace mqc
