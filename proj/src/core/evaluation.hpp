#pragma once

#include <string>
#include <vector>

#include "matrix.hpp"

namespace aka {

// Embedded retrieval problem: rows of `query`/`gallery` are already in the
// model's feature space. Camera ids are optional (-1 disables filtering).
struct RetrievalTask {
    Matrix query;
    std::vector<int> query_labels;
    std::vector<int> query_cameras;
    Matrix gallery;
    std::vector<int> gallery_labels;
    std::vector<int> gallery_cameras;
};

struct TaskMetrics {
    double mean_ap = 0.0;
    double rank1 = 0.0;
    int valid_queries = 0;
    int skipped_queries = 0;  // queries with no valid gallery match, dropped
};

struct MetricsEntry {
    int step = 0;
    std::string domain;
    std::string split;  // "seen" | "unseen"
    double mean_ap = 0.0;
    double rank1 = 0.0;
};

struct Aggregates {
    double sbar_map = 0.0;
    double sbar_rank1 = 0.0;
    double ubar_map = 0.0;
    double ubar_rank1 = 0.0;
};

struct MetricsReport {
    std::vector<MetricsEntry> entries;
    Aggregates aggregates;
    int final_step = 0;
};

// Gallery indices by ascending Euclidean distance to the query vector; exact
// ties break to the lower gallery index.
std::vector<int> rank_gallery(const double* query_vec, int dim, const Matrix& gallery);

// Precision averaged at relevant ranks, no interpolation.
double average_precision(const std::vector<char>& relevance_in_rank_order);

TaskMetrics evaluate_task(const RetrievalTask& task);

// Arithmetic means over the final-step entries of the given domains.
Aggregates aggregate(const std::vector<MetricsEntry>& entries,
                     const std::vector<std::string>& seen_domains,
                     const std::vector<std::string>& unseen_domains, int final_step);

// Per-domain metric trajectory over steps (the forgetting-curve data).
std::vector<std::pair<int, double>> metric_trajectory(const std::vector<MetricsEntry>& entries,
                                                      const std::string& domain, bool use_map);

}  // namespace aka
