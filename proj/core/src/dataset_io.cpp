#include "olrsc/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace olrsc {

namespace {

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no,
                            const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

// from_chars does not accept an explicit plus sign, but labels like "+1" are
// common in the wild.
const char* skip_plus(const char* begin, const char* end) {
    return (begin != end && *begin == '+') ? begin + 1 : begin;
}

}  // namespace

SparseDataset read_sparse_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");

    struct Row {
        int label;
        std::vector<std::pair<int, double>> entries;  // (1-based index, value)
    };
    std::vector<Row> rows;
    int max_index = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string field;
        if (!(fields >> field)) continue;  // blank line

        Row row;
        {
            const char* end = field.data() + field.size();
            const char* begin = skip_plus(field.data(), end);
            double label = 0.0;
            auto [ptr, ec] = std::from_chars(begin, end, label);
            if (ec != std::errc() || ptr != end)
                fail_line(path, line_no, "bad label '" + field + "'");
            row.label = static_cast<int>(label);
        }
        int prev_index = 0;
        while (fields >> field) {
            const auto colon = field.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == field.size())
                fail_line(path, line_no, "bad feature '" + field + "'");
            int index = 0;
            {
                const char* begin = field.data();
                const char* end = begin + colon;
                auto [ptr, ec] = std::from_chars(begin, end, index);
                if (ec != std::errc() || ptr != end)
                    fail_line(path, line_no, "bad feature index '" + field + "'");
            }
            double value = 0.0;
            {
                const char* end = field.data() + field.size();
                const char* begin = skip_plus(field.data() + colon + 1, end);
                auto [ptr, ec] = std::from_chars(begin, end, value);
                if (ec != std::errc() || ptr != end)
                    fail_line(path, line_no, "bad feature value '" + field + "'");
            }
            if (index < 1) fail_line(path, line_no, "feature indices are 1-based");
            if (index <= prev_index)
                fail_line(path, line_no, "feature indices must be strictly increasing");
            prev_index = index;
            if (index > max_index) max_index = index;
            row.entries.emplace_back(index, value);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no samples");

    SparseDataset ds;
    ds.Z = Matrix::Zero(max_index, static_cast<Eigen::Index>(rows.size()));
    ds.labels.reserve(rows.size());
    std::map<int, int> remap;  // raw label -> dense id, by first appearance
    for (std::size_t j = 0; j < rows.size(); ++j) {
        for (const auto& [index, value] : rows[j].entries)
            ds.Z(index - 1, static_cast<Eigen::Index>(j)) = value;
        auto [it, fresh] = remap.emplace(rows[j].label, static_cast<int>(remap.size()));
        (void)fresh;
        ds.labels.push_back(it->second);
    }
    ds.n_classes = static_cast<int>(remap.size());
    return ds;
}

void scale_columns_unit_max(Matrix& Z) {
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        const double peak = Z.col(j).cwiseAbs().maxCoeff();
        if (peak > 0.0) Z.col(j) /= peak;
    }
}

}  // namespace olrsc
