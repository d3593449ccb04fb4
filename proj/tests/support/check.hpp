#pragma once

#include "cci/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

// Asserts that `expr` throws cci::Error of the given kind.
#define CHECK_KIND(expr, expected_kind)                                                   \
    do {                                                                                  \
        bool cci_thrown_ = false;                                                         \
        try {                                                                             \
            (void)(expr);                                                                 \
        } catch (const cci::Error& cci_e_) {                                              \
            cci_thrown_ = true;                                                           \
            CHECK_MESSAGE(cci_e_.kind() == (expected_kind), "got: " << cci_e_.what());   \
        }                                                                                 \
        CHECK_MESSAGE(cci_thrown_, "expected " << cci::to_string(expected_kind));        \
    } while (false)

namespace testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(CCI_FIXTURE_DIR) / rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("cci_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
