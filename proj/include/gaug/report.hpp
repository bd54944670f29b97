#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "gaug/metrics.hpp"

namespace gaug {

/// Per-class entries. A metric key is present iff that metric was enabled;
/// its value is unset when the metric is undefined for the class.
struct ClassMetrics {
    std::size_t count = 0;
    std::map<std::string, std::optional<double>> values;
};

struct MetricsReport {
    std::map<std::string, double> global;
    std::map<int, ClassMetrics> per_class;
    std::map<std::string, double> ris;
    std::map<std::string, Correlation> correlations;

    /// Stable ordering: per_class is an array in ascending class id, all object keys sorted.
    nlohmann::json to_json() const;
    static MetricsReport from_json(const nlohmann::json& j);

    /// Header `class,fid,nn_corruption,top1`; empty cells for unavailable values.
    std::string per_class_csv() const;
};

}  // namespace gaug
