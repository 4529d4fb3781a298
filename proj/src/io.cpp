#include "nscr/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace nscr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

bool parse_integer(const std::string& s, long long& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && !s.empty();
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in, const char* what) {
    std::array<unsigned char, 8> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 8))
        throw InputError(std::string("binary dataset truncated while reading ") + what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[static_cast<std::size_t>(i)];
    return v;
}

} // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

std::vector<std::string> LabeledDataset::labels() const {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(samples.size()));
    const auto& part = samples.partition();
    for (Index k = 0; k < part.num_classes(); ++k)
        for (Index j = 0; j < part.size(k); ++j) out.push_back(part.class_id(k));
    return out;
}

LabeledDataset group_by_label(const Matrix<double>& columns, const std::vector<std::string>& labels,
                              std::vector<std::string> feature_names) {
    require(static_cast<Index>(labels.size()) == columns.cols(), "label count does not match sample count");
    require(columns.cols() >= 1, "dataset has zero samples");

    std::vector<std::string> ids(labels.begin(), labels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const bool numeric = std::all_of(ids.begin(), ids.end(), [](const std::string& s) {
        long long v = 0;
        return parse_integer(s, v);
    });
    if (numeric) {
        std::stable_sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
            long long x = 0;
            long long y = 0;
            parse_integer(a, x);
            parse_integer(b, y);
            return x < y;
        });
    }

    std::map<std::string, std::vector<Index>> members;
    for (std::size_t j = 0; j < labels.size(); ++j) members[labels[j]].push_back(static_cast<Index>(j));

    Matrix<double> values(columns.rows(), columns.cols());
    std::vector<Index> counts;
    Index out = 0;
    for (const auto& id : ids) {
        const auto& cols = members[id];
        for (Index j : cols) values.col(out++) = columns.col(j);
        counts.push_back(static_cast<Index>(cols.size()));
    }
    if (feature_names.empty()) {
        for (Index r = 0; r < columns.rows(); ++r) feature_names.push_back("f" + std::to_string(r));
    }
    require(static_cast<Index>(feature_names.size()) == columns.rows(), "feature name count mismatch");
    return {SampleMatrixd(std::move(values), ClassPartition::from_counts(ids, counts)),
            std::move(feature_names)};
}

LabeledDataset parse_csv_dataset(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw InputError(source + ": missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);
    std::set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].empty())
            throw InputError(source + ": header column " + std::to_string(c + 1) + " is empty");
        if (!seen.insert(header[c]).second)
            throw InputError(source + ": duplicate header '" + header[c] + "' at column " +
                             std::to_string(c + 1));
    }
    const auto label_it = std::find(header.begin(), header.end(), "label");
    if (label_it == header.end()) throw InputError(source + ": header has no 'label' column");
    const auto label_col = static_cast<std::size_t>(label_it - header.begin());
    if (header.size() < 2) throw InputError(source + ": no feature columns");

    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_col) feature_names.push_back(header[c]);
    const auto D = static_cast<Index>(feature_names.size());

    std::vector<std::string> labels;
    std::vector<double> flat;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw InputError(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(header.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            if (c == label_col) {
                if (cell.empty())
                    throw InputError(source + ": row " + std::to_string(row) + " has an empty label");
                labels.push_back(cell);
                continue;
            }
            double value = 0.0;
            const char* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(cell.data(), end, value);
            if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
                throw InputError(source + ": row " + std::to_string(row) + ", column '" + header[c] +
                                 "': cannot parse '" + cell + "' as a finite number");
            flat.push_back(value);
        }
    }
    if (labels.empty()) throw InputError(source + ": zero samples");

    const auto N = static_cast<Index>(labels.size());
    Matrix<double> columns = Eigen::Map<const Matrix<double>>(flat.data(), D, N);
    return group_by_label(columns, labels, std::move(feature_names));
}

LabeledDataset load_csv_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return parse_csv_dataset(in, path.string());
}

void write_csv_dataset(const std::filesystem::path& path, const LabeledDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "label";
    for (const auto& name : data.feature_names) out << ',' << quote_if_needed(name);
    out << '\n';
    const auto labels = data.labels();
    const auto& X = data.samples.values();
    for (Index j = 0; j < X.cols(); ++j) {
        out << quote_if_needed(labels[static_cast<std::size_t>(j)]);
        for (Index r = 0; r < X.rows(); ++r) out << ',' << format_double(X(r, j));
        out << '\n';
    }
    if (!out) throw InputError("failed writing " + path.string());
}

LabeledDataset load_binary_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), 8) || std::string_view(magic.data(), 8) != kBinaryMagic)
        throw InputError(path.string() + ": bad magic, expected NSCRMAT1");
    const auto D = get_u64(in, "D");
    const auto N = get_u64(in, "N");
    if (D == 0 || N == 0) throw InputError(path.string() + ": zero-sized matrix");
    if (D > (1ULL << 32) || N > (1ULL << 32)) throw InputError(path.string() + ": implausible matrix size");

    Matrix<double> columns(static_cast<Index>(D), static_cast<Index>(N));
    for (Index j = 0; j < columns.cols(); ++j)
        for (Index r = 0; r < columns.rows(); ++r) columns(r, j) = std::bit_cast<double>(get_u64(in, "values"));
    if (!columns.allFinite()) throw InputError(path.string() + ": non-finite matrix entry");

    const auto count = get_u64(in, "label count");
    if (count != N)
        throw InputError(path.string() + ": label count " + std::to_string(count) + " does not match N=" +
                         std::to_string(N));
    std::vector<std::string> labels;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len = get_u64(in, "label length");
        if (len > (1ULL << 20)) throw InputError(path.string() + ": label too long");
        std::string s(static_cast<std::size_t>(len), '\0');
        if (!in.read(s.data(), static_cast<std::streamsize>(len)))
            throw InputError(path.string() + ": binary dataset truncated in label " + std::to_string(i));
        if (s.empty()) throw InputError(path.string() + ": empty label at sample " + std::to_string(i));
        labels.push_back(std::move(s));
    }
    return group_by_label(columns, labels);
}

void write_binary_dataset(const std::filesystem::path& path, const LabeledDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(kBinaryMagic.data(), 8);
    const auto& X = data.samples.values();
    put_u64(out, static_cast<std::uint64_t>(X.rows()));
    put_u64(out, static_cast<std::uint64_t>(X.cols()));
    for (Index j = 0; j < X.cols(); ++j)
        for (Index r = 0; r < X.rows(); ++r) put_u64(out, std::bit_cast<std::uint64_t>(X(r, j)));
    const auto labels = data.labels();
    put_u64(out, labels.size());
    for (const auto& s : labels) {
        put_u64(out, s.size());
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    if (!out) throw InputError("failed writing " + path.string());
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::array<char, 8> head{};
    in.read(head.data(), 8);
    if (in.gcount() == 8 && std::string_view(head.data(), 8) == kBinaryMagic) return load_binary_dataset(path);
    return load_csv_dataset(path);
}

} // namespace nscr
