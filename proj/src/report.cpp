#include "gaug/report.hpp"

#include <cmath>
#include <sstream>

#include "gaug/error.hpp"

namespace gaug {

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw Error("report value '" + what + "' is not finite");
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j;
    j["global"] = nlohmann::json::object();
    for (const auto& [k, v] : global) {
        require_finite(v, k);
        j["global"][k] = v;
    }
    j["per_class"] = nlohmann::json::array();
    for (const auto& [cls, m] : per_class) {
        nlohmann::json row;
        row["class"] = cls;
        row["count"] = m.count;
        for (const auto& [k, v] : m.values) {
            if (v) require_finite(*v, k);
            row[k] = optional_json(v);
        }
        j["per_class"].push_back(row);
    }
    j["ris"] = nlohmann::json::object();
    for (const auto& [k, v] : ris) {
        require_finite(v, k);
        j["ris"][k] = v;
    }
    j["correlations"] = nlohmann::json::object();
    for (const auto& [k, c] : correlations) {
        j["correlations"][k] = {{"pearson", optional_json(c.pearson)}, {"spearman", optional_json(c.spearman)}};
    }
    return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
    MetricsReport r;
    try {
        for (const auto& [k, v] : j.at("global").items()) r.global[k] = v.get<double>();
        for (const auto& row : j.at("per_class")) {
            ClassMetrics m;
            m.count = row.at("count").get<std::size_t>();
            for (const auto& [k, v] : row.items()) {
                if (k == "class" || k == "count") continue;
                m.values[k] = optional_from(v);
            }
            r.per_class[row.at("class").get<int>()] = m;
        }
        for (const auto& [k, v] : j.at("ris").items()) r.ris[k] = v.get<double>();
        for (const auto& [k, v] : j.at("correlations").items()) {
            r.correlations[k] = Correlation{optional_from(v.at("spearman")), optional_from(v.at("pearson"))};
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed metrics report: ") + e.what());
    }
    return r;
}

std::string MetricsReport::per_class_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "class,fid,nn_corruption,top1\n";
    for (const auto& [cls, m] : per_class) {
        out << cls;
        for (const char* key : {"fid", "nn_corruption", "top1"}) {
            out << ',';
            auto it = m.values.find(key);
            if (it != m.values.end() && it->second) out << *it->second;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace gaug
