#include "mhm/io.hpp"
#include "mhm/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mhm {

std::string num12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round12(double x) {
    return std::strtod(num12(x).c_str(), nullptr);
}

nlohmann::json params_to_json(const ModelParams& par) {
    nlohmann::json j;
    j["p"] = round12(par.p);
    j["q"] = round12(par.q);
    j["g"] = round12(par.g);
    j["b"] = round12(par.b);
    j["w"] = round12(par.w);
    j["r"] = round12(par.r);
    j["delta"] = round12(par.delta);
    j["beta"] = round12(par.beta);
    return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
    ModelParams par;
    struct Field {
        const char* name;
        double* slot;
    };
    Field fields[] = {{"p", &par.p}, {"q", &par.q}, {"g", &par.g}, {"b", &par.b},
                      {"w", &par.w}, {"r", &par.r}, {"delta", &par.delta}, {"beta", &par.beta}};
    for (const Field& f : fields) {
        if (!j.contains(f.name) || !j.at(f.name).is_number())
            throw DomainError(std::string("params: missing or non-numeric field '") + f.name + "'");
        *f.slot = j.at(f.name).get<double>();
    }
    return par;
}

nlohmann::json derived_to_json(const DerivedQuantities& d) {
    nlohmann::json j;
    j["params"] = params_to_json(d.params);
    j["v_bar"] = round12(d.v_bar);
    j["v_lo"] = round12(d.v_lo);
    j["c"] = round12(d.c);
    j["x_delta"] = round12(d.x_delta);
    j["alpha_lo"] = round12(d.alpha_lo);
    j["delta_lo"] = round12(d.delta_lo);
    j["U_bar"] = round12(d.U_bar);
    j["U_P"] = round12(d.U_P);
    j["U_R"] = round12(d.U_R);
    j["U_R_lo"] = round12(d.U_R_lo);
    j["U_I"] = round12(d.U_I);
    if (d.gamma.has_value())
        j["gamma"] = round12(*d.gamma);
    else
        j["gamma"] = nullptr;
    j["regime"] = regime_name(d.regime);
    j["mediation_nontrivial"] = d.mediation_nontrivial;
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DomainError("cannot open for writing: " + path);
    out << content;
    if (!out)
        throw DomainError("short write: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DomainError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << "\n";
    }
    write_text_file(path, out.str());
}

} // namespace mhm
