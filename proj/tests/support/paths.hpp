#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace evopoc::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(EVOPOC_FIXTURES) / rel; }
inline std::filesystem::path test_data(const std::string& rel) { return std::filesystem::path(EVOPOC_TEST_DATA) / rel; }

inline nlohmann::json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace evopoc::testing
