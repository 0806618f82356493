#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sacd {

/// One time-indexed record. Fields are optional because training, evaluation
/// and diagnostics fire on different cadences; records landing on the same
/// step merge into one row. `wall_time` stays in memory only — the persisted
/// CSV holds the deterministic columns so identical runs produce identical
/// files.
struct MetricRow {
    long step = 0;
    double wall_time = 0.0;
    std::optional<double> entropy_mean;
    std::optional<double> alpha;
    std::optional<double> critic_loss1;
    std::optional<double> critic_loss2;
    std::optional<double> policy_loss;
    std::optional<double> y_mean;
    std::optional<double> score_mean;
    std::optional<double> score_std;
    std::optional<double> q_estimate_mean;
    std::optional<double> q_true_mean;
    std::optional<double> bias_mean;
    std::optional<double> state_cosine_similarity;
};

/// Append-mostly trace of training metrics with strictly increasing steps.
/// Any NaN value aborts immediately with a diagnosis naming the metric and
/// step.
class MetricTrace {
public:
    /// Merges into the last row when steps match; steps may never decrease.
    void add(const MetricRow& row);

    const std::vector<MetricRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }

    /// Last recorded evaluation score, if any evaluation ran.
    std::optional<double> final_score_mean() const;

    static const char* csv_header();
    void write_csv(const std::filesystem::path& path) const;
    static MetricTrace read_csv(const std::filesystem::path& path);

private:
    std::vector<MetricRow> rows_;
};

/// Shortest round-trip decimal rendering (used for all CSV numbers).
std::string format_double(double v);

}  // namespace sacd
