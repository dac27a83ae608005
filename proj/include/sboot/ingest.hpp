#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sboot/dataset.hpp"

namespace sboot {

/// Describes one user-supplied CSV dataset.
///
/// Manifest files are line-oriented `key = value` text; `#` starts a comment.
///
///     name        = breast-cancer          (defaults to the file stem)
///     path        = breast-cancer.csv      (relative to the manifest)
///     target      = Class                  (header name or 0-based column index)
///     task        = classification         (or regression)
///     label.benign    = 0                  (optional label dictionary)
///     label.malignant = 1
///     test_path   = breast-cancer-test.csv (optional official test file)
///     test_column = is_test                (optional 0/1 official split column)
///
/// A manifest with test_path or test_column declares an official split and
/// bypasses the fixed random split.
struct DatasetManifest {
    std::string name;
    std::filesystem::path path;
    std::string target_column;
    Task task = Task::regression();
    std::map<std::string, std::size_t> labels;
    std::optional<std::filesystem::path> test_path;
    std::optional<std::string> test_column;

    bool has_official_split() const noexcept { return test_path || test_column; }
};

/// Parses a manifest file. Throws DataError on unknown keys or missing fields.
DatasetManifest load_manifest(const std::filesystem::path& manifest_file);

/// Loads and validates the manifest's CSV (UTF-8, comma-delimited, header
/// row, '.' decimal separator). Rows with empty or non-numeric feature
/// cells are collected and reported together in one DataError. String
/// labels are mapped through the manifest dictionary when present;
/// otherwise distinct labels are numbered in ascending order.
Dataset load_csv(const DatasetManifest& manifest);

/// Train/test data for the manifest: the official split if it declares one,
/// otherwise fixed_split(split_seed).
DataPair prepare(const DatasetManifest& manifest, std::uint64_t split_seed);

/// Writes the dataset as CSV with the target in the last column named `y`.
/// Class labels are written through the dataset's label dictionary if set.
void dump_csv(const Dataset& d, const std::filesystem::path& path);

/// Writes the CSV text for `d` to a string, same layout as dump_csv.
std::string to_csv(const Dataset& d);

/// FNV-1a of the file's bytes.
std::uint64_t file_hash(const std::filesystem::path& path);

/// All `*.manifest` files in dir, sorted by file name. Empty if dir is absent.
std::vector<std::filesystem::path> discover_manifests(const std::filesystem::path& dir);

/// Splits one CSV record; double-quoted fields may contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace sboot
