#ifndef SODKIT_CHECK_SELFTEST_HPP
#define SODKIT_CHECK_SELFTEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace sodkit::selftest {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Runs every oracle suite with the given seed. Optional weights_path
// exercises the weight-container round trip through that file instead of a
// temporary one.
std::vector<SuiteResult> run_all(std::uint64_t seed, const std::string& weights_path = "");

}  // namespace sodkit::selftest

#endif
