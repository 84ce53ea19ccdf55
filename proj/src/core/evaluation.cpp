#include "evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aka {

std::vector<int> rank_gallery(const double* query_vec, int dim, const Matrix& gallery) {
    if (gallery.rows() == 0) throw std::invalid_argument("rank_gallery: empty gallery");
    if (gallery.cols() != dim) throw std::invalid_argument("rank_gallery: dimension mismatch");
    std::vector<double> dist(gallery.rows());
    for (int i = 0; i < gallery.rows(); ++i)
        dist[i] = squared_distance(query_vec, gallery.row_ptr(i), dim);
    std::vector<int> order(gallery.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dist[a] < dist[b]; });
    return order;
}

double average_precision(const std::vector<char>& relevance_in_rank_order) {
    int relevant = 0;
    double sum_precision = 0.0;
    for (size_t k = 0; k < relevance_in_rank_order.size(); ++k) {
        if (!relevance_in_rank_order[k]) continue;
        ++relevant;
        sum_precision += static_cast<double>(relevant) / static_cast<double>(k + 1);
    }
    if (relevant == 0) throw std::invalid_argument("average_precision: no relevant items");
    return sum_precision / relevant;
}

TaskMetrics evaluate_task(const RetrievalTask& task) {
    const int nq = task.query.rows();
    const int ng = task.gallery.rows();
    if (nq == 0 || ng == 0) throw std::runtime_error("evaluate_task: empty query or gallery");
    if (static_cast<int>(task.query_labels.size()) != nq ||
        static_cast<int>(task.gallery_labels.size()) != ng)
        throw std::invalid_argument("evaluate_task: label count mismatch");
    const bool has_cameras =
        !task.query_cameras.empty() && !task.gallery_cameras.empty();

    TaskMetrics out;
    double ap_sum = 0.0;
    int rank1_hits = 0;
    for (int q = 0; q < nq; ++q) {
        const std::vector<int> order = rank_gallery(task.query.row_ptr(q), task.query.cols(),
                                                    task.gallery);
        std::vector<char> relevance;
        relevance.reserve(order.size());
        bool any_relevant = false;
        for (int gi : order) {
            if (has_cameras && task.gallery_labels[gi] == task.query_labels[q] &&
                task.gallery_cameras[gi] == task.query_cameras[q] && task.query_cameras[q] >= 0)
                continue;  // same identity seen by the same camera: excluded
            const bool rel = task.gallery_labels[gi] == task.query_labels[q];
            relevance.push_back(rel ? 1 : 0);
            any_relevant = any_relevant || rel;
        }
        if (!any_relevant || relevance.empty()) {
            ++out.skipped_queries;
            continue;
        }
        ap_sum += average_precision(relevance);
        rank1_hits += relevance.front() ? 1 : 0;
        ++out.valid_queries;
    }
    if (out.valid_queries == 0) throw std::runtime_error("evaluate_task: no valid queries");
    out.mean_ap = ap_sum / out.valid_queries;
    out.rank1 = static_cast<double>(rank1_hits) / out.valid_queries;
    return out;
}

namespace {

const MetricsEntry* find_entry(const std::vector<MetricsEntry>& entries, int step,
                               const std::string& domain) {
    for (const MetricsEntry& e : entries)
        if (e.step == step && e.domain == domain) return &e;
    return nullptr;
}

}  // namespace

Aggregates aggregate(const std::vector<MetricsEntry>& entries,
                     const std::vector<std::string>& seen_domains,
                     const std::vector<std::string>& unseen_domains, int final_step) {
    Aggregates out;
    if (seen_domains.empty()) throw std::invalid_argument("aggregate: no seen domains listed");
    for (const std::string& d : seen_domains) {
        const MetricsEntry* e = find_entry(entries, final_step, d);
        if (!e)
            throw std::runtime_error("aggregate: missing final-step entry for domain " + d);
        out.sbar_map += e->mean_ap;
        out.sbar_rank1 += e->rank1;
    }
    out.sbar_map /= seen_domains.size();
    out.sbar_rank1 /= seen_domains.size();
    for (const std::string& d : unseen_domains) {
        const MetricsEntry* e = find_entry(entries, final_step, d);
        if (!e)
            throw std::runtime_error("aggregate: missing final-step entry for domain " + d);
        out.ubar_map += e->mean_ap;
        out.ubar_rank1 += e->rank1;
    }
    if (!unseen_domains.empty()) {
        out.ubar_map /= unseen_domains.size();
        out.ubar_rank1 /= unseen_domains.size();
    }
    return out;
}

std::vector<std::pair<int, double>> metric_trajectory(const std::vector<MetricsEntry>& entries,
                                                      const std::string& domain, bool use_map) {
    std::vector<std::pair<int, double>> out;
    for (const MetricsEntry& e : entries)
        if (e.domain == domain) out.emplace_back(e.step, use_map ? e.mean_ap : e.rank1);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace aka
