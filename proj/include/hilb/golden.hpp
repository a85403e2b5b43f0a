#pragma once

/*
 * Loader for the golden reference corpus (golden/<id>.json, one file per
 * surface).  The directory defaults to the baked-in source path and can be
 * overridden with the HILB_GOLDEN_DIR environment variable.
 */

#include "surface.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>

#ifndef HILB_DEFAULT_GOLDEN_DIR
#define HILB_DEFAULT_GOLDEN_DIR "golden"
#endif

namespace hilb {

inline std::string golden_dir() {
    if (const char* e = std::getenv("HILB_GOLDEN_DIR")) return e;
    return HILB_DEFAULT_GOLDEN_DIR;
}

inline nlohmann::json load_golden(const SurfaceId& id) {
    std::string path = golden_dir() + "/" + id.str() + ".json";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("golden record not found: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

/* golden matrix entry lists -> Mat2K (entries in row-major order) */
inline Mat2K golden_matrix(long m, const nlohmann::json& entries) {
    return {QuadNum::parse(m, entries.at(0).get<std::string>()),
            QuadNum::parse(m, entries.at(1).get<std::string>()),
            QuadNum::parse(m, entries.at(2).get<std::string>()),
            QuadNum::parse(m, entries.at(3).get<std::string>())};
}

}  // namespace hilb
