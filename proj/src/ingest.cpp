#include "sboot/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sboot/error.hpp"

namespace sboot {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& text)
{
    if (text.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::optional<std::size_t> parse_index(const std::string& text)
{
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!trim(line).empty()) {
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

std::string format_number(double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

/// Parsed CSV before the train/test decision.
struct Table {
    Dataset data;
    std::vector<bool> is_test;
};

std::size_t resolve_column(const std::vector<std::string>& header, const std::string& column,
                           const std::filesystem::path& path)
{
    const auto it = std::find(header.begin(), header.end(), column);
    if (it != header.end()) {
        return static_cast<std::size_t>(it - header.begin());
    }
    if (const auto index = parse_index(column); index && *index < header.size()) {
        return *index;
    }
    throw DataError(path.string() + ": column '" + column + "' not found in header");
}

/// Reads `path` and maps labels. `labels` is shared between the training
/// and official test file so both use the same class numbering.
Table read_table(const DatasetManifest& m, const std::filesystem::path& path,
                 std::map<std::string, std::size_t>& labels, bool extend_labels)
{
    const auto lines = read_lines(path);
    if (lines.empty()) {
        throw DataError(path.string() + ": missing header row");
    }
    std::vector<std::string> header;
    for (auto& cell : split_csv_line(lines.front())) {
        header.push_back(trim(cell));
    }
    std::set<std::string> unique(header.begin(), header.end());
    if (unique.size() != header.size() || unique.count("") != 0) {
        throw DataError(path.string() + ": header has empty or duplicate column names");
    }
    const std::size_t target = resolve_column(header, m.target_column, path);
    std::optional<std::size_t> test_col;
    if (m.test_column) {
        test_col = resolve_column(header, *m.test_column, path);
        if (*test_col == target) {
            throw DataError(path.string() + ": test column coincides with target column");
        }
    }
    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != target && (!test_col || c != *test_col)) {
            feature_cols.push_back(c);
            feature_names.push_back(header[c]);
        }
    }
    if (feature_cols.empty()) {
        throw DataError(path.string() + ": no feature columns");
    }

    std::vector<double> features;
    std::vector<std::string> raw_targets;
    std::vector<bool> is_test;
    std::vector<std::string> problems;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(r + 1) + ")";
        if (cells.size() != header.size()) {
            problems.push_back(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
            continue;
        }
        std::vector<double> row;
        bool ok = true;
        for (auto c : feature_cols) {
            const auto cell = trim(cells[c]);
            const auto value = parse_number(cell);
            if (!value) {
                problems.push_back(where + ": " + (cell.empty() ? "empty" : "non-numeric '" + cell + "'") +
                                   " cell in column '" + header[c] + "'");
                ok = false;
                break;
            }
            row.push_back(*value);
        }
        auto label = trim(cells[target]);
        if (ok && label.empty()) {
            problems.push_back(where + ": empty target cell");
            ok = false;
        }
        bool test_flag = false;
        if (ok && test_col) {
            const auto flag = trim(cells[*test_col]);
            if (flag != "0" && flag != "1") {
                problems.push_back(where + ": test column must be 0 or 1");
                ok = false;
            }
            test_flag = flag == "1";
        }
        if (!ok) {
            continue;
        }
        features.insert(features.end(), row.begin(), row.end());
        raw_targets.push_back(std::move(label));
        is_test.push_back(test_flag);
    }
    if (!problems.empty()) {
        std::string message = path.string() + ": " + std::to_string(problems.size()) + " invalid row(s)";
        for (const auto& p : problems) {
            message += "\n  " + p;
        }
        throw DataError(message);
    }

    std::vector<double> targets;
    targets.reserve(raw_targets.size());
    std::vector<std::string> class_names;
    Task task = m.task;
    if (task.is_classification()) {
        if (extend_labels && labels.empty()) {
            // No dictionary: number distinct labels, numerically if all parse.
            std::vector<std::string> distinct(raw_targets.begin(), raw_targets.end());
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            const bool numeric = std::all_of(distinct.begin(), distinct.end(),
                                             [](const std::string& s) { return parse_number(s).has_value(); });
            if (numeric) {
                std::stable_sort(distinct.begin(), distinct.end(), [](const auto& a, const auto& b) {
                    return *parse_number(a) < *parse_number(b);
                });
            }
            for (std::size_t c = 0; c < distinct.size(); ++c) {
                labels.emplace(distinct[c], c);
            }
        }
        for (std::size_t r = 0; r < raw_targets.size(); ++r) {
            const auto it = labels.find(raw_targets[r]);
            if (it == labels.end()) {
                throw DataError(path.string() + ": row " + std::to_string(r + 1) + ": unmapped label '" +
                                raw_targets[r] + "'");
            }
            targets.push_back(static_cast<double>(it->second));
        }
        std::size_t num_classes = 0;
        for (const auto& [name, c] : labels) {
            num_classes = std::max(num_classes, c + 1);
        }
        class_names.assign(num_classes, "");
        for (const auto& [name, c] : labels) {
            if (!class_names[c].empty()) {
                throw DataError(m.name + ": label dictionary maps two names to class " + std::to_string(c));
            }
            class_names[c] = name;
        }
        if (std::any_of(class_names.begin(), class_names.end(), [](const auto& s) { return s.empty(); })) {
            throw DataError(m.name + ": label dictionary is not dense in [0, C)");
        }
        task = Task::classification(num_classes);
    } else {
        for (std::size_t r = 0; r < raw_targets.size(); ++r) {
            const auto value = parse_number(raw_targets[r]);
            if (!value) {
                throw DataError(path.string() + ": row " + std::to_string(r + 1) + ": non-numeric target '" +
                                raw_targets[r] + "'");
            }
            targets.push_back(*value);
        }
    }
    return {Dataset(m.name, task, feature_cols.size(), std::move(features), std::move(targets),
                    std::move(feature_names), std::move(class_names)),
            std::move(is_test)};
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (quoted) {
            if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                cell += '"';
                ++k;
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

DatasetManifest load_manifest(const std::filesystem::path& manifest_file)
{
    std::ifstream in(manifest_file);
    if (!in) {
        throw DataError("cannot open manifest " + manifest_file.string());
    }
    DatasetManifest m;
    m.name = manifest_file.stem().string();
    const auto base = manifest_file.parent_path();
    std::optional<std::string> task;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = manifest_file.string() + ":" + std::to_string(line_no);
        if (eq == std::string::npos) {
            throw DataError(where + ": expected 'key = value'");
        }
        const auto key = trim(std::string_view(line).substr(0, eq));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        if (key == "name") {
            m.name = value;
        } else if (key == "path") {
            m.path = base / value;
        } else if (key == "target") {
            m.target_column = value;
        } else if (key == "task") {
            task = value;
        } else if (key == "test_path") {
            m.test_path = base / value;
        } else if (key == "test_column") {
            m.test_column = value;
        } else if (key.rfind("label.", 0) == 0 && key.size() > 6) {
            const auto c = parse_index(value);
            if (!c) {
                throw DataError(where + ": label value must be a non-negative integer");
            }
            m.labels[key.substr(6)] = *c;
        } else {
            throw DataError(where + ": unknown key '" + key + "'");
        }
    }
    if (m.path.empty()) {
        throw DataError(manifest_file.string() + ": missing 'path'");
    }
    if (m.target_column.empty()) {
        throw DataError(manifest_file.string() + ": missing 'target'");
    }
    if (task == "classification") {
        m.task = Task::classification(0);
    } else if (task == "regression") {
        m.task = Task::regression();
    } else {
        throw DataError(manifest_file.string() + ": 'task' must be classification or regression");
    }
    if (!m.labels.empty() && !m.task.is_classification()) {
        throw DataError(manifest_file.string() + ": label dictionary given for a regression task");
    }
    return m;
}

Dataset load_csv(const DatasetManifest& manifest)
{
    auto labels = manifest.labels;
    return read_table(manifest, manifest.path, labels, true).data;
}

DataPair prepare(const DatasetManifest& manifest, std::uint64_t split_seed)
{
    auto labels = manifest.labels;
    auto table = read_table(manifest, manifest.path, labels, true);
    if (manifest.test_path) {
        auto test_manifest = manifest;
        test_manifest.test_column.reset();
        auto test = read_table(test_manifest, *manifest.test_path, labels, false);
        if (test.data.num_features() != table.data.num_features()) {
            throw DataError(manifest.name + ": test file has a different number of features");
        }
        if (table.data.task().is_classification() &&
            test.data.task().num_classes != table.data.task().num_classes) {
            throw DataError(manifest.name + ": test file introduces unseen labels");
        }
        return {std::move(table.data), std::move(test.data)};
    }
    if (manifest.test_column) {
        TrainTestSplit split;
        for (std::size_t i = 0; i < table.is_test.size(); ++i) {
            (table.is_test[i] ? split.test_indices : split.train_indices).push_back(i);
        }
        if (split.train_indices.empty() || split.test_indices.empty()) {
            throw DataError(manifest.name + ": official split leaves train or test empty");
        }
        return apply_split(table.data, split);
    }
    return apply_split(table.data, fixed_split(table.data, split_seed));
}

std::string to_csv(const Dataset& d)
{
    std::string out;
    for (std::size_t j = 0; j < d.num_features(); ++j) {
        out += d.feature_names().empty() ? "x" + std::to_string(j + 1) : d.feature_names()[j];
        out += ',';
    }
    out += "y\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (double v : d.row(i)) {
            out += format_number(v);
            out += ',';
        }
        if (d.task().is_classification() && !d.class_names().empty()) {
            out += d.class_names()[d.label(i)];
        } else {
            out += format_number(d.target(i));
        }
        out += '\n';
    }
    return out;
}

void dump_csv(const Dataset& d, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << to_csv(d);
}

std::uint64_t file_hash(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return fnv1a({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

std::vector<std::filesystem::path> discover_manifests(const std::filesystem::path& dir)
{
    std::vector<std::filesystem::path> found;
    std::error_code ec;
    if (dir.empty() || !std::filesystem::is_directory(dir, ec)) {
        return found;
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".manifest") {
            found.push_back(entry.path());
        }
    }
    std::sort(found.begin(), found.end());
    return found;
}

} // namespace sboot
