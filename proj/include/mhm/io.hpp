#pragma once

#include "mhm/model.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace mhm {

// All numbers leaving the library go through round12/num12 so that report
// files are stable to the last byte and survive a parse/serialize round trip.
double round12(double x);
std::string num12(double x);

nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json derived_to_json(const DerivedQuantities& d);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Rows are preformatted strings; the writer only does the joining.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

} // namespace mhm
