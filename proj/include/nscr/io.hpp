#pragma once

#include "nscr/data.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nscr {

/// A dataset as read from disk: columns grouped by class in ascending
/// class-id order (numeric order when every label is an integer), stable
/// within a class by file order.
struct LabeledDataset {
    SampleMatrixd samples;
    std::vector<std::string> feature_names;

    std::vector<std::string> labels() const;
};

/// CSV with a header row; one column named `label`, all others numeric.
LabeledDataset load_csv_dataset(const std::filesystem::path& path);
LabeledDataset parse_csv_dataset(std::istream& in, const std::string& source = "<stream>");
void write_csv_dataset(const std::filesystem::path& path, const LabeledDataset& data);

/// Binary layout: "NSCRMAT1", u64 D, u64 N, D*N f64 column-major, then
/// u64 label count followed by (u64 byte length, UTF-8 bytes) per label.
/// All integers and floats little-endian.
inline constexpr std::string_view kBinaryMagic = "NSCRMAT1";
LabeledDataset load_binary_dataset(const std::filesystem::path& path);
void write_binary_dataset(const std::filesystem::path& path, const LabeledDataset& data);

/// Dispatches on the leading magic bytes.
LabeledDataset load_dataset(const std::filesystem::path& path);

/// Builds a grouped dataset from per-sample columns and labels in any order.
LabeledDataset group_by_label(const Matrix<double>& columns, const std::vector<std::string>& labels,
                              std::vector<std::string> feature_names = {});

/// Shortest round-trip decimal representation.
std::string format_double(double value);

} // namespace nscr
