#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "colex/cli.hpp"

namespace clitest {

namespace fs = std::filesystem;

inline fs::path toy_config() { return fs::path(COLEX_SOURCE_DIR) / "data" / "toy" / "toy.toml"; }

inline fs::path fresh_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("colex_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::remove_all(p);
    return p;
}

struct Result {
    int code;
    std::string err;
};

inline Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "colexnet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream err;
    int code = colex::cli::run(static_cast<int>(argv.size()), argv.data(), err);
    return {code, err.str()};
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every file under root keyed by relative path; manifest timing lines dropped.
inline std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), root).string();
        std::string body = slurp(e.path());
        if (rel.rfind("manifests", 0) == 0) {
            std::istringstream in(body);
            std::string line, kept;
            while (std::getline(in, line))
                if (line.find("wall_time_s") == std::string::npos) kept += line + "\n";
            body = kept;
        }
        out[rel] = body;
    }
    return out;
}

}  // namespace clitest
