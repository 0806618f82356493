#include "sacd/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sacd/errors.hpp"

namespace sacd {

namespace {

struct Column {
    const char* name;
    std::optional<double> MetricRow::* field;
};

constexpr Column kColumns[] = {
    {"entropy_mean", &MetricRow::entropy_mean},
    {"alpha", &MetricRow::alpha},
    {"critic_loss1", &MetricRow::critic_loss1},
    {"critic_loss2", &MetricRow::critic_loss2},
    {"policy_loss", &MetricRow::policy_loss},
    {"y_mean", &MetricRow::y_mean},
    {"score_mean", &MetricRow::score_mean},
    {"score_std", &MetricRow::score_std},
    {"q_estimate_mean", &MetricRow::q_estimate_mean},
    {"q_true_mean", &MetricRow::q_true_mean},
    {"bias_mean", &MetricRow::bias_mean},
    {"state_cosine_similarity", &MetricRow::state_cosine_similarity},
};

void check_row(const MetricRow& row) {
    for (const Column& col : kColumns) {
        const auto& v = row.*(col.field);
        if (v && std::isnan(*v))
            throw NanAbortError("metric '" + std::string(col.name) + "' is NaN at step " +
                                std::to_string(row.step));
    }
}

void merge_into(MetricRow& dst, const MetricRow& src) {
    for (const Column& col : kColumns) {
        const auto& v = src.*(col.field);
        if (v) dst.*(col.field) = v;
    }
    dst.wall_time = src.wall_time;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void MetricTrace::add(const MetricRow& row) {
    check_row(row);
    if (!rows_.empty()) {
        if (row.step < rows_.back().step)
            throw std::logic_error("MetricTrace: steps must be nondecreasing (got " +
                                   std::to_string(row.step) + " after " +
                                   std::to_string(rows_.back().step) + ")");
        if (row.step == rows_.back().step) {
            merge_into(rows_.back(), row);
            return;
        }
    }
    rows_.push_back(row);
}

std::optional<double> MetricTrace::final_score_mean() const {
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it)
        if (it->score_mean) return it->score_mean;
    return std::nullopt;
}

const char* MetricTrace::csv_header() {
    return "step,entropy_mean,alpha,critic_loss1,critic_loss2,policy_loss,y_mean,score_mean,"
           "score_std,q_estimate_mean,q_true_mean,bias_mean,state_cosine_similarity";
}

void MetricTrace::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << csv_header() << "\n";
    for (const MetricRow& row : rows_) {
        out << row.step;
        for (const Column& col : kColumns) {
            const auto& v = row.*(col.field);
            out << ',';
            if (v) out << format_double(*v);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
}

MetricTrace MetricTrace::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty metrics file " + path.string());
    if (line != csv_header()) throw IoError("unexpected metrics header in " + path.string());

    MetricTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        // A trailing empty cell is dropped by getline; pad to full width.
        constexpr std::size_t width = 1 + sizeof(kColumns) / sizeof(kColumns[0]);
        while (cells.size() < width) cells.emplace_back();
        if (cells.size() != width) throw IoError("malformed metrics row in " + path.string());

        MetricRow row;
        row.step = std::stol(cells[0]);
        for (std::size_t i = 0; i < sizeof(kColumns) / sizeof(kColumns[0]); ++i) {
            if (!cells[i + 1].empty()) row.*(kColumns[i].field) = std::stod(cells[i + 1]);
        }
        trace.add(row);
    }
    return trace;
}

}  // namespace sacd
