#include "lsar/report.hpp"

#include "lsar/error.hpp"

#include <cstdio>

namespace lsar {

void EvalReport::finalize() {
    double sum = 0.0;
    for (const auto& [key, v] : per_language) sum += v;
    aggregate = per_language.empty() ? 0.0 : sum / static_cast<double>(per_language.size());
}

double EvalReport::value(std::string_view key) const {
    for (const auto& [k, v] : per_language) {
        if (k == key) return v;
    }
    throw ArgumentError("report has no entry '" + std::string(key) + "'");
}

Json EvalReport::to_json() const {
    Json j;
    j["metric"] = metric;
    j["config"] = config;
    Json per = Json::object();
    for (const auto& [k, v] : per_language) per[k] = v;
    j["per_language"] = per;
    j["aggregate"] = aggregate;
    j["warnings"] = warnings;
    if (!summary.empty()) {
        Json s = Json::object();
        for (const auto& [k, v] : summary) s[k] = v;
        j["summary"] = s;
    }
    return j;
}

std::string EvalReport::dump() const {
    return to_json().dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace lsar
