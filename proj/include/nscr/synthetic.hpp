#pragma once

#include "nscr/data.hpp"
#include "nscr/random.hpp"

#include <Eigen/QR>

#include <cstdint>
#include <string>
#include <vector>

namespace nscr {

/// Union-of-subspaces fixture: class k draws samples U_k w + noise with U_k a
/// random orthonormal basis of a low-dimensional subspace.
struct SubspaceFixture {
    Index classes = 10;
    Index ambient_dim = 50;
    Index subspace_dim = 5;
    Index train_per_class = 20;
    Index queries_per_class = 20;
    double noise = 0.05;
    std::uint64_t seed = 1;
};

struct SyntheticData {
    SampleMatrixd train;
    SampleMatrixd queries;
};

inline Matrix<double> gaussian_matrix(Rng& rng, Index rows, Index cols) {
    Matrix<double> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

inline SyntheticData make_subspace_data(const SubspaceFixture& spec) {
    require(spec.classes >= 1 && spec.ambient_dim >= 1 && spec.subspace_dim >= 1, "fixture sizes must be positive");
    require(spec.subspace_dim <= spec.ambient_dim, "subspace dimension exceeds ambient dimension");
    require(spec.train_per_class >= 1 && spec.queries_per_class >= 0, "bad per-class counts");
    require(spec.noise >= 0.0, "noise must be >= 0");

    Rng rng(spec.seed);
    const Index per_class = spec.train_per_class + spec.queries_per_class;
    Matrix<double> train(spec.ambient_dim, spec.classes * spec.train_per_class);
    Matrix<double> queries(spec.ambient_dim, spec.classes * spec.queries_per_class);
    std::vector<std::string> ids;
    for (Index k = 0; k < spec.classes; ++k) {
        ids.push_back(std::to_string(k));
        const Matrix<double> basis = Eigen::HouseholderQR<Matrix<double>>(
                                         gaussian_matrix(rng, spec.ambient_dim, spec.subspace_dim))
                                         .householderQ() *
                                     Matrix<double>::Identity(spec.ambient_dim, spec.subspace_dim);
        const Matrix<double> weights = gaussian_matrix(rng, spec.subspace_dim, per_class);
        const Matrix<double> noise = spec.noise * gaussian_matrix(rng, spec.ambient_dim, per_class);
        const Matrix<double> samples = basis * weights + noise;
        train.middleCols(k * spec.train_per_class, spec.train_per_class) = samples.leftCols(spec.train_per_class);
        queries.middleCols(k * spec.queries_per_class, spec.queries_per_class) =
            samples.rightCols(spec.queries_per_class);
    }
    std::vector<Index> train_counts(static_cast<std::size_t>(spec.classes), spec.train_per_class);
    std::vector<Index> query_counts(static_cast<std::size_t>(spec.classes), spec.queries_per_class);
    SyntheticData out;
    out.train = SampleMatrixd(std::move(train), ClassPartition::from_counts(ids, train_counts));
    if (spec.queries_per_class > 0)
        out.queries = SampleMatrixd(std::move(queries), ClassPartition::from_counts(ids, query_counts));
    else
        out.queries = SampleMatrixd(Matrix<double>(spec.ambient_dim, 0), ClassPartition{});
    return out;
}

} // namespace nscr
