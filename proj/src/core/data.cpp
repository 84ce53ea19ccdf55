#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace aka {

const Sample& DomainDataset::train_sample(size_t i) const {
    if (train_released_)
        throw std::logic_error("DomainDataset '" + name + "': train split already released");
    ++train_reads_;
    return train_.at(i);
}

void DomainDataset::release_train() {
    train_.clear();
    train_.shrink_to_fit();
    train_released_ = true;
}

int DomainDataset::input_dim() const {
    if (!train_.empty()) return static_cast<int>(train_.front().input.size());
    if (!query.empty()) return static_cast<int>(query.front().input.size());
    if (!gallery.empty()) return static_cast<int>(gallery.front().input.size());
    return 0;
}

std::vector<int> DomainDataset::train_identities() const {
    std::set<int> ids;
    for (const Sample& s : train_) ids.insert(s.label);
    return std::vector<int>(ids.begin(), ids.end());
}

int DomainDataset::train_identity_count() const {
    return static_cast<int>(train_identities().size());
}

std::vector<std::pair<int, std::vector<int>>> DomainDataset::train_index_by_identity() const {
    std::map<int, std::vector<int>> by_id;
    for (size_t i = 0; i < train_.size(); ++i)
        by_id[train_[i].label].push_back(static_cast<int>(i));
    return std::vector<std::pair<int, std::vector<int>>>(by_id.begin(), by_id.end());
}

void DomainDataset::validate() const {
    const int d = input_dim();
    auto check_split = [&](const std::vector<Sample>& split, const char* what) {
        for (const Sample& s : split) {
            if (static_cast<int>(s.input.size()) != d)
                throw std::runtime_error("dataset '" + name + "': inconsistent vector width in " +
                                         what);
            if (s.label < 0)
                throw std::runtime_error("dataset '" + name + "': negative label in " + what);
        }
    };
    check_split(train_, "train");
    check_split(query, "query");
    check_split(gallery, "gallery");
    std::set<int> train_ids, test_ids, gallery_ids;
    for (const Sample& s : train_) train_ids.insert(s.label);
    for (const Sample& s : query) test_ids.insert(s.label);
    for (const Sample& s : gallery) {
        test_ids.insert(s.label);
        gallery_ids.insert(s.label);
    }
    for (int id : test_ids)
        if (train_ids.count(id))
            throw std::runtime_error("dataset '" + name +
                                     "': train and test identities overlap (id " +
                                     std::to_string(id) + ")");
    for (const Sample& s : query)
        if (!gallery_ids.count(s.label))
            throw std::runtime_error("dataset '" + name + "': query identity " +
                                     std::to_string(s.label) + " has no gallery match");
}

void SyntheticSpec::validate() const {
    if (train_identities < 1) throw std::invalid_argument("synthetic: need >= 1 train identity");
    if (test_identities < 1) throw std::invalid_argument("synthetic: need >= 1 test identity");
    if (min_samples < 1 || max_samples < min_samples)
        throw std::invalid_argument("synthetic: bad samples-per-identity range");
    if (query_per_identity < 1 || gallery_per_identity < 1)
        throw std::invalid_argument("synthetic: test identities need >= 1 query and gallery sample");
    if (input_dim < 1) throw std::invalid_argument("synthetic: input_dim must be positive");
    if (signal_dim > input_dim)
        throw std::invalid_argument("synthetic: signal_dim cannot exceed input_dim");
    if (nuisance_scale < 0.0) throw std::invalid_argument("synthetic: nuisance_scale must be >= 0");
    if (separation <= 0.0) throw std::invalid_argument("synthetic: separation must be > 0");
    if (noise < 0.0) throw std::invalid_argument("synthetic: noise must be >= 0");
}

Matrix random_orthogonal(int n, Rng& rng) {
    Matrix q = rng.normal_matrix(n, n, 1.0);
    return orthogonalize_columns(q, rng);
}

Matrix orthogonalize_columns(Matrix q, Rng& rng) {
    // modified Gram-Schmidt
    const int n = q.rows();
    if (q.cols() != n) throw std::invalid_argument("orthogonalize_columns: square input only");
    for (int c = 0; c < n; ++c) {
        for (int prev = 0; prev < c; ++prev) {
            double proj = 0.0;
            for (int r = 0; r < n; ++r) proj += q(r, c) * q(r, prev);
            for (int r = 0; r < n; ++r) q(r, c) -= proj * q(r, prev);
        }
        double norm = 0.0;
        for (int r = 0; r < n; ++r) norm += q(r, c) * q(r, c);
        norm = std::sqrt(norm);
        if (norm < 1e-10) {
            // essentially impossible with Gaussian draws; restart the column
            for (int r = 0; r < n; ++r) q(r, c) = rng.normal();
            --c;
            continue;
        }
        for (int r = 0; r < n; ++r) q(r, c) /= norm;
    }
    return q;
}

namespace {

std::vector<double> shifted_sample(const std::vector<double>& center, int input_dim,
                                   double noise_std, double nuisance_scale,
                                   const Matrix* rotation, const std::vector<double>& offset,
                                   Rng& noise_rng) {
    const int s = static_cast<int>(center.size());
    std::vector<double> x(input_dim);
    for (int k = 0; k < s; ++k) x[k] = center[k] + noise_std * noise_rng.normal();
    for (int k = s; k < input_dim; ++k) x[k] = nuisance_scale * noise_rng.normal();
    if (rotation != nullptr) {
        std::vector<double> rotated(input_dim, 0.0);
        for (int r = 0; r < input_dim; ++r)
            for (int c = 0; c < input_dim; ++c) rotated[r] += (*rotation)(r, c) * x[c];
        x = rotated;
    }
    for (int k = 0; k < input_dim; ++k) x[k] += offset[k];
    return x;
}

}  // namespace

DomainDataset generate_domain(const SyntheticSpec& spec, int domain_index) {
    spec.validate();
    const int d = spec.input_dim;
    const int s = spec.effective_signal_dim();

    // Base geometry is shared across domain indices; only the shift operator
    // and the per-sample noise depend on the index. With the shift disabled
    // and zero noise (and no nuisance coordinates), all domains are identical
    // up to labels.
    Rng base(derive_seed(spec.seed, "synthetic_base"));
    std::vector<std::vector<double>> train_centers, test_centers;
    for (int i = 0; i < spec.train_identities; ++i) {
        std::vector<double> c(s);
        for (double& v : c) v = spec.separation * base.normal();
        train_centers.push_back(std::move(c));
    }
    std::vector<int> train_counts;
    for (int i = 0; i < spec.train_identities; ++i)
        train_counts.push_back(spec.min_samples +
                               static_cast<int>(base.uniform_int(
                                   static_cast<uint64_t>(spec.max_samples - spec.min_samples + 1))));
    for (int i = 0; i < spec.test_identities; ++i) {
        std::vector<double> c(s);
        for (double& v : c) v = spec.separation * base.normal();
        test_centers.push_back(std::move(c));
    }

    Rng shift_rng(derive_seed(spec.seed, "synthetic_shift", static_cast<uint64_t>(domain_index)));
    std::optional<Matrix> rotation;
    if (spec.shift_rotation > 0.0) {
        // orthogonalized blend of the identity with a Gaussian matrix: strength 0
        // is no rotation, large strengths approach a fully random orthogonal map
        Matrix basis(d, d);
        const double sigma = spec.shift_rotation / std::sqrt(static_cast<double>(d));
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                basis(r, c) = (r == c ? 1.0 : 0.0) + sigma * shift_rng.normal();
        rotation = orthogonalize_columns(basis, shift_rng);
    }
    std::vector<double> offset(d, 0.0);
    if (spec.shift_translation > 0.0)
        for (double& v : offset) v = spec.shift_translation * shift_rng.normal();

    const double noise_std = spec.noise * (1.0 + spec.noise_scale_growth * domain_index);
    Rng noise_rng(derive_seed(spec.seed, "synthetic_noise", static_cast<uint64_t>(domain_index)));
    const Matrix* rot = rotation ? &*rotation : nullptr;

    DomainDataset ds;
    ds.name = "synthetic-" + std::to_string(domain_index);
    for (int i = 0; i < spec.train_identities; ++i)
        for (int n = 0; n < train_counts[i]; ++n)
            ds.train().push_back(Sample{
                shifted_sample(train_centers[i], d, noise_std, spec.nuisance_scale, rot, offset,
                               noise_rng),
                i, -1});
    const int test_base = spec.train_identities;
    for (int i = 0; i < spec.test_identities; ++i)
        for (int n = 0; n < spec.query_per_identity; ++n)
            ds.query.push_back(Sample{
                shifted_sample(test_centers[i], d, noise_std, spec.nuisance_scale, rot, offset,
                               noise_rng),
                test_base + i, -1});
    for (int i = 0; i < spec.test_identities; ++i)
        for (int n = 0; n < spec.gallery_per_identity; ++n)
            ds.gallery.push_back(Sample{
                shifted_sample(test_centers[i], d, noise_std, spec.nuisance_scale, rot, offset,
                               noise_rng),
                test_base + i, -1});
    ds.validate();
    return ds;
}

namespace {

// Remaps labels of one split using (and extending) `mapping`.
void relabel_split(std::vector<Sample>& split, std::map<int, int>& mapping, int& next_label) {
    std::set<int> locals;
    for (const Sample& s : split) locals.insert(s.label);
    for (int l : locals)
        if (!mapping.count(l)) mapping[l] = next_label++;
    for (Sample& s : split) s.label = mapping.at(s.label);
}

}  // namespace

DomainStream build_stream(std::vector<DomainDataset> train_domains,
                          std::vector<DomainDataset> unseen_domains,
                          const std::vector<int>& order, const std::string& order_label) {
    if (train_domains.empty()) throw std::invalid_argument("build_stream: need >= 1 domain");
    std::vector<int> perm = order;
    if (perm.empty()) {
        perm.resize(train_domains.size());
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    }
    if (perm.size() != train_domains.size())
        throw std::invalid_argument("build_stream: order length != domain count");
    std::vector<bool> seen_idx(train_domains.size(), false);
    for (int p : perm) {
        if (p < 0 || p >= static_cast<int>(train_domains.size()) || seen_idx[p])
            throw std::invalid_argument("build_stream: order is not a permutation");
        seen_idx[p] = true;
    }

    DomainStream stream;
    stream.order_label = order_label;
    for (int p : perm) stream.domains.push_back(std::move(train_domains[p]));

    // train labels first, contiguous blocks in arrival order
    int next_label = 0;
    for (DomainDataset& ds : stream.domains) {
        std::map<int, int> mapping;
        const int before = next_label;
        relabel_split(ds.train(), mapping, next_label);
        stream.identities_per_domain.push_back(next_label - before);
        // test labels of this domain are assigned later
    }
    stream.total_train_identities = next_label;

    for (DomainDataset& ds : stream.domains) {
        std::map<int, int> mapping;
        relabel_split(ds.query, mapping, next_label);
        relabel_split(ds.gallery, mapping, next_label);
    }

    stream.unseen.name = "unseen";
    for (DomainDataset& ds : unseen_domains) {
        std::map<int, int> mapping;
        relabel_split(ds.query, mapping, next_label);
        relabel_split(ds.gallery, mapping, next_label);
        for (Sample& s : ds.query) stream.unseen.query.push_back(std::move(s));
        for (Sample& s : ds.gallery) stream.unseen.gallery.push_back(std::move(s));
    }
    for (DomainDataset& ds : stream.domains) ds.validate();
    if (!stream.unseen.query.empty()) stream.unseen.validate();
    return stream;
}

// --- ingestion ------------------------------------------------------------------

namespace {

std::vector<Sample> parse_csv_split(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("ingest: cannot open " + file);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("ingest: " + file + ":1: empty file");
    // header: id[,camera],v0,...
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) header.push_back(tok);
    }
    if (header.empty() || header[0] != "id")
        throw std::runtime_error("ingest: " + file + ":1: header must start with 'id'");
    const bool has_camera = header.size() > 1 && header[1] == "camera";
    const size_t vec_start = has_camera ? 2 : 1;
    if (header.size() <= vec_start)
        throw std::runtime_error("ingest: " + file + ":1: no vector columns");
    const size_t dim = header.size() - vec_start;

    std::vector<Sample> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() != header.size())
            throw std::runtime_error("ingest: " + file + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(header.size()) +
                                     " columns, got " + std::to_string(toks.size()));
        Sample s;
        try {
            s.label = std::stoi(toks[0]);
            if (has_camera) s.camera = std::stoi(toks[1]);
            s.input.resize(dim);
            for (size_t k = 0; k < dim; ++k) s.input[k] = std::stod(toks[vec_start + k]);
        } catch (const std::exception&) {
            throw std::runtime_error("ingest: " + file + ":" + std::to_string(lineno) +
                                     ": numeric parse failure");
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Sample> parse_identity_dirs(const fs::path& split_dir) {
    std::vector<Sample> out;
    std::vector<fs::path> id_dirs;
    for (const auto& e : fs::directory_iterator(split_dir))
        if (e.is_directory()) id_dirs.push_back(e.path());
    std::sort(id_dirs.begin(), id_dirs.end());
    for (const fs::path& idp : id_dirs) {
        int label;
        try {
            label = std::stoi(idp.filename().string());
        } catch (const std::exception&) {
            throw std::runtime_error("ingest: identity folder name is not an integer: " +
                                     idp.string());
        }
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(idp))
            if (e.is_regular_file()) files.push_back(e.path());
        if (files.empty()) {
            std::cerr << "warning: empty identity folder skipped: " << idp.string() << "\n";
            continue;
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
            std::ifstream is(f);
            if (!is) throw std::runtime_error("ingest: cannot open " + f.string());
            Sample s;
            s.label = label;
            std::string tok;
            while (is >> tok) {
                // allow comma separators inside vector files
                std::stringstream ss(tok);
                std::string part;
                while (std::getline(ss, part, ',')) {
                    if (part.empty()) continue;
                    try {
                        s.input.push_back(std::stod(part));
                    } catch (const std::exception&) {
                        throw std::runtime_error("ingest: " + f.string() +
                                                 ": numeric parse failure at '" + part + "'");
                    }
                }
            }
            if (s.input.empty())
                throw std::runtime_error("ingest: " + f.string() + ": no values");
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace

std::vector<Sample> load_samples_csv(const std::string& file) { return parse_csv_split(file); }

DomainDataset ingest_directory(const std::string& path) {
    const fs::path root(path);
    if (!fs::exists(root)) throw std::runtime_error("ingest: no such path: " + path);
    DomainDataset ds;
    ds.name = root.filename().string().empty() ? path : root.filename().string();
    if (fs::exists(root / "train.csv")) {
        ds.train() = parse_csv_split((root / "train.csv").string());
        ds.query = parse_csv_split((root / "query.csv").string());
        ds.gallery = parse_csv_split((root / "gallery.csv").string());
    } else if (fs::is_directory(root / "train")) {
        ds.train() = parse_identity_dirs(root / "train");
        ds.query = parse_identity_dirs(root / "query");
        ds.gallery = parse_identity_dirs(root / "gallery");
    } else {
        throw std::runtime_error(
            "ingest: " + path +
            ": expected train.csv/query.csv/gallery.csv or train/query/gallery directories");
    }
    ds.validate();
    return ds;
}

namespace {

void write_csv_split(const std::vector<Sample>& split, const std::string& file, bool with_camera,
                     int dim) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("export: cannot open " + file);
    os << "id";
    if (with_camera) os << ",camera";
    for (int k = 0; k < dim; ++k) os << ",v" << k;
    os << "\n";
    char buf[32];
    for (const Sample& s : split) {
        os << s.label;
        if (with_camera) os << "," << s.camera;
        for (double v : s.input) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            os << "," << buf;
        }
        os << "\n";
    }
}

}  // namespace

void export_dataset(const DomainDataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    bool with_camera = false;
    for (const Sample& s : ds.train()) with_camera = with_camera || s.camera >= 0;
    for (const Sample& s : ds.query) with_camera = with_camera || s.camera >= 0;
    for (const Sample& s : ds.gallery) with_camera = with_camera || s.camera >= 0;
    const int dim = ds.input_dim();
    write_csv_split(ds.train(), (fs::path(dir) / "train.csv").string(), with_camera, dim);
    write_csv_split(ds.query, (fs::path(dir) / "query.csv").string(), with_camera, dim);
    write_csv_split(ds.gallery, (fs::path(dir) / "gallery.csv").string(), with_camera, dim);
}

Matrix samples_to_matrix(const std::vector<Sample>& samples) {
    if (samples.empty()) return Matrix();
    Matrix m(static_cast<int>(samples.size()), static_cast<int>(samples.front().input.size()));
    for (int i = 0; i < m.rows(); ++i) {
        if (samples[i].input.size() != static_cast<size_t>(m.cols()))
            throw std::invalid_argument("samples_to_matrix: ragged inputs");
        std::copy(samples[i].input.begin(), samples[i].input.end(), m.row_ptr(i));
    }
    return m;
}

std::vector<int> sample_labels(const std::vector<Sample>& samples) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) out.push_back(s.label);
    return out;
}

std::vector<int> sample_cameras(const std::vector<Sample>& samples) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) out.push_back(s.camera);
    return out;
}

}  // namespace aka
