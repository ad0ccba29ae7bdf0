#include "scensim/fixtures.hpp"

#include <cstdlib>
#include <fstream>

#include "scensim/error.hpp"

#ifndef SCENSIM_FIXTURE_ROOT
#define SCENSIM_FIXTURE_ROOT "fixtures"
#endif

namespace scensim::fixtures {

std::filesystem::path root() {
    if (const char* env = std::getenv("SCENSIM_FIXTURES_DIR")) return env;
    return SCENSIM_FIXTURE_ROOT;
}

std::filesystem::path german_bight_scenario() {
    return root() / "german-bight" / "german-bight.scenario.xml";
}

std::filesystem::path german_bight_golden_fom() {
    return root() / "german-bight" / "fom-container-ship.golden.xml";
}

std::filesystem::path german_bight_golden_stream() {
    return root() / "german-bight" / "reference.golden.ndjson";
}

std::string load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UsageError, "cannot read fixture '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace scensim::fixtures
