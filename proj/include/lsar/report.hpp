#ifndef LSAR_REPORT_HPP
#define LSAR_REPORT_HPP

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lsar {

using Json = nlohmann::ordered_json;

/**
 * Result of one evaluation run.
 *
 * `aggregate` is the unweighted mean of `per_language` (set by finalize()).
 * `summary` carries secondary scalars some metrics define (e.g. the diagonal
 * and off-diagonal means of a breakdown); it is serialized after `warnings`
 * and only when non-empty.
 */
struct EvalReport {
    std::string metric;
    Json config = Json::object();
    std::vector<std::pair<std::string, double>> per_language;
    double aggregate = 0.0;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, double>> summary;

    /// Recomputes aggregate from per_language (0 when empty).
    void finalize();
    double value(std::string_view key) const;

    Json to_json() const;
    /// Pretty-printed JSON with a trailing newline.
    std::string dump() const;
};

/// 64-bit FNV-1a, used to fingerprint model and input files in report configs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace lsar

#endif
