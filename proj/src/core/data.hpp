#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"

namespace aka {

struct Sample {
    std::vector<double> input;
    int label = -1;    // identity; local until a stream assigns global labels
    int camera = -1;   // -1 means no camera tag
};

// One domain: train split plus a query/gallery test pair. Train and test
// identity sets are disjoint within the domain; a DomainStream additionally
// makes all labels globally disjoint.
class DomainDataset {
public:
    std::string name;
    std::vector<Sample> query;
    std::vector<Sample> gallery;

    DomainDataset() = default;

    std::vector<Sample>& train() { return train_; }
    const std::vector<Sample>& train() const { return train_; }

    // Instrumented train access; throws once the handle has been released.
    const Sample& train_sample(size_t i) const;
    uint64_t train_reads() const { return train_reads_; }
    bool train_released() const { return train_released_; }
    void release_train();

    int input_dim() const;
    int train_identity_count() const;
    std::vector<int> train_identities() const;
    // indices of train samples per identity, keyed by label
    std::vector<std::pair<int, std::vector<int>>> train_index_by_identity() const;

    void validate() const;

private:
    std::vector<Sample> train_;
    mutable uint64_t train_reads_ = 0;
    bool train_released_ = false;
};

// Controls synthetic domain generation. Identity information lives in a
// signal_dim-dimensional cluster subspace; the remaining coordinates carry
// identity-free nuisance variance. Each domain applies its own orthogonal
// transform (strength shift_rotation) plus an offset, so the signal subspace
// orientation is domain-specific: retrieval requires suppressing the current
// domain's nuisance directions, which is what later domains overwrite.
struct SyntheticSpec {
    int train_identities = 20;
    int test_identities = 10;
    int min_samples = 12;    // per train identity (set min < max for imbalance)
    int max_samples = 12;
    int query_per_identity = 2;
    int gallery_per_identity = 4;
    int input_dim = 32;
    int signal_dim = 0;             // 0 means all of input_dim carries signal
    double nuisance_scale = 3.0;    // stddev of the identity-free coordinates
    double separation = 4.0;        // identity-center standard deviation
    double noise = 1.0;             // within-identity standard deviation
    double shift_rotation = 1.0;    // 0 disables the per-domain orthogonal transform
    double shift_translation = 1.0; // stddev of the per-domain offset
    double noise_scale_growth = 0.0;  // noise multiplier grows by this per domain index
    uint64_t seed = 0;

    int effective_signal_dim() const {
        return signal_dim > 0 && signal_dim <= input_dim ? signal_dim : input_dim;
    }
    void validate() const;
};

struct DomainStream {
    std::vector<DomainDataset> domains;  // in training order, globally relabeled
    DomainDataset unseen;                // merged held-out test pool (train empty)
    std::string order_label;
    int total_train_identities = 0;
    std::vector<int> identities_per_domain;
};

DomainDataset generate_domain(const SyntheticSpec& spec, int domain_index);

// Reorders `train_domains` by `order`, assigns globally disjoint labels
// (train blocks first, in arrival order, so classifier labels are contiguous),
// and merges the held-out domains into one unseen test pool.
DomainStream build_stream(std::vector<DomainDataset> train_domains,
                          std::vector<DomainDataset> unseen_domains,
                          const std::vector<int>& order, const std::string& order_label);

// Reads a dataset from `path`: either train.csv/query.csv/gallery.csv files
// (columns id[,camera],v0..v{d-1}) or train/query/gallery directories of
// per-identity folders holding one whitespace-separated vector file per sample.
DomainDataset ingest_directory(const std::string& path);

// One CSV split on its own (same column schema as above).
std::vector<Sample> load_samples_csv(const std::string& file);

void export_dataset(const DomainDataset& ds, const std::string& dir);

Matrix random_orthogonal(int n, Rng& rng);
// Gram-Schmidt on the columns of a square matrix (degenerate columns redrawn).
Matrix orthogonalize_columns(Matrix q, Rng& rng);

Matrix samples_to_matrix(const std::vector<Sample>& samples);
std::vector<int> sample_labels(const std::vector<Sample>& samples);
std::vector<int> sample_cameras(const std::vector<Sample>& samples);

}  // namespace aka
