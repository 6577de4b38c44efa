#pragma once

#include <cstdint>
#include <filesystem>

namespace presscheck::fixture {

struct FixturePaths {
    std::filesystem::path root;
    std::filesystem::path config;
    std::filesystem::path dialogs;
    std::filesystem::path scrapes;
    std::filesystem::path human_feedback;
    std::filesystem::path mock_dir;
};

/// Writes a complete offline bundle under `root`: a dialog file shaped like
/// the public release (102 conversations / 915 messages after ingestion,
/// receiver labels reproducing the published human-baseline scores), board
/// scrapes for every turn, three annotators' feedback, mock scripts for every
/// pipeline stage, and a ready-to-run config.json.
///
/// Everything is deterministic in `seed`.
FixturePaths generate_reference_fixture(const std::filesystem::path& root, std::uint64_t seed);

}  // namespace presscheck::fixture
