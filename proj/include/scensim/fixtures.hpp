#pragma once

#include <filesystem>
#include <string>

namespace scensim::fixtures {

/// Root of the committed fixture tree. SCENSIM_FIXTURES_DIR overrides the
/// build-time default.
std::filesystem::path root();

std::filesystem::path german_bight_scenario();
std::filesystem::path german_bight_golden_fom();
std::filesystem::path german_bight_golden_stream();

std::string load(const std::filesystem::path& path);

} // namespace scensim::fixtures
