#include "nscr/data.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace nscr;

namespace {

SampleMatrixd two_class(const Matrix<double>& values, Index first_class) {
    const std::vector<Index> counts{first_class, values.cols() - first_class};
    return {values, ClassPartition::from_counts({"a", "b"}, counts)};
}

} // namespace

TEST_CASE("partition rejects empty classes and bad offsets") {
    CHECK_THROWS_AS(ClassPartition({"a", "b"}, {0, 2, 2}), InputError);
    CHECK_THROWS_AS(ClassPartition({"a"}, {1, 2}), InputError);
    CHECK_THROWS_AS(ClassPartition({"a", "a"}, {0, 1, 2}), InputError);
    const ClassPartition p({"x", "y", "z"}, {0, 2, 3, 6});
    CHECK(p.num_samples() == 6);
    CHECK(p.class_of(0) == 0);
    CHECK(p.class_of(2) == 1);
    CHECK(p.class_of(5) == 2);
    CHECK(p.min_class_size() == 1);
}

TEST_CASE("sample matrix checks shape and finiteness") {
    Matrix<double> m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    CHECK_THROWS_AS(SampleMatrixd(m, ClassPartition::from_counts({"a"}, std::vector<Index>{2})), InputError);
    m(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(two_class(m, 1), InputError);
}

TEST_CASE("normalize_columns") {
    SUBCASE("3-4-5 column") {
        Matrix<double> m(2, 1);
        m << 3, 4;
        const auto n = normalize_columns(m);
        CHECK(n(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(n(1, 0) == doctest::Approx(0.8).epsilon(1e-15));
    }
    SUBCASE("zero column is reported by index") {
        Matrix<double> m = Matrix<double>::Ones(2, 3);
        m.col(2).setZero();
        try {
            normalize_columns(m);
            FAIL("expected an error");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("column 2") != std::string::npos);
        }
    }
    SUBCASE("idempotent and partition-preserving") {
        Rng rng(3);
        const auto sm = two_class(gaussian_matrix(rng, 7, 9), 4);
        const auto once = normalize_columns(sm);
        const auto twice = normalize_columns(once);
        CHECK((once.values() - twice.values()).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(once.partition() == sm.partition());
        for (Index j = 0; j < once.size(); ++j) CHECK(std::abs(once.values().col(j).norm() - 1.0) <= 1e-12);
    }
    SUBCASE("zero query rejected") {
        CHECK_THROWS_AS(normalize_query(Vector<double>::Zero(3)), InputError);
    }
}

TEST_CASE("fit_pca") {
    SUBCASE("rank-1 data reconstructs exactly") {
        Matrix<double> m(2, 6);
        const Vector<double> dir = Vector<double>::Unit(2, 0) * 0.6 + Vector<double>::Unit(2, 1) * 0.8;
        const Vector<double> offset = (Vector<double>(2) << 1.0, -2.0).finished();
        for (Index j = 0; j < 6; ++j) m.col(j) = offset + (static_cast<double>(j) - 2.5) * dir;
        const auto sm = two_class(m, 3);
        const auto model = fit_pca(sm, 1);
        const auto proj = apply_pca(model, sm);
        const Matrix<double> recon = (model.projection.transpose() * proj.values()).colwise() + model.mean;
        CHECK((recon - m).cwiseAbs().maxCoeff() <= 1e-10);
        // Positions along the line, sign fixed by the largest entry (0.8 > 0).
        for (Index j = 0; j < 6; ++j) CHECK(proj.values()(0, j) == doctest::Approx(static_cast<double>(j) - 2.5));
    }
    SUBCASE("d = D is a rotation") {
        Rng rng(11);
        const auto sm = two_class(gaussian_matrix(rng, 4, 12), 6);
        const auto proj = apply_pca(fit_pca(sm, 4), sm);
        for (Index i = 0; i < 12; ++i)
            for (Index j = 0; j < 12; ++j) {
                const double before = (sm.values().col(i) - sm.values().col(j)).norm();
                const double after = (proj.values().col(i) - proj.values().col(j)).norm();
                CHECK(std::abs(before - after) <= 1e-8);
            }
        // Gram of projected data equals Gram of centered data.
        const auto model = fit_pca(sm, 4);
        const Matrix<double> centered = sm.values().colwise() - model.mean;
        const Matrix<double> g1 = centered.transpose() * centered;
        const Matrix<double> g2 = proj.values().transpose() * proj.values();
        CHECK((g1 - g2).cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("orthonormal rows and sign convention on random 10x50") {
        Rng rng(5);
        const auto sm = two_class(gaussian_matrix(rng, 10, 50), 25);
        const auto model = fit_pca(sm, 3);
        const Matrix<double> ppt = model.projection * model.projection.transpose();
        CHECK((ppt - Matrix<double>::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-8);
        for (Index r = 0; r < 3; ++r) {
            Index pivot = 0;
            model.projection.row(r).cwiseAbs().maxCoeff(&pivot);
            CHECK(model.projection(r, pivot) > 0.0);
        }
        // Directions ordered by decreasing variance.
        const auto proj = apply_pca(model, sm);
        const Vector<double> var = proj.values().rowwise().squaredNorm();
        CHECK(var(0) >= var(1));
        CHECK(var(1) >= var(2));
    }
    SUBCASE("reconstruction at d = rank") {
        Rng rng(8);
        const Matrix<double> basis = gaussian_matrix(rng, 9, 3);
        const auto sm = two_class(basis * gaussian_matrix(rng, 3, 20), 10);
        const auto model = fit_pca(sm, 3);
        const auto proj = apply_pca(model, sm);
        const Matrix<double> recon = (model.projection.transpose() * proj.values()).colwise() + model.mean;
        CHECK((recon - sm.values()).cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("dimension errors") {
        Rng rng(1);
        const auto sm = two_class(gaussian_matrix(rng, 4, 6), 3);
        CHECK_THROWS_AS(fit_pca(sm, 0), InputError);
        CHECK_THROWS_AS(fit_pca(sm, 5), InputError);
        const auto model = fit_pca(sm, 2);
        CHECK_THROWS_AS(apply_pca(model, Vector<double>::Zero(3)), InputError);
    }
}

TEST_CASE("apply_pca centering and linearity") {
    Rng rng(21);
    const auto sm = two_class(gaussian_matrix(rng, 6, 10), 5);
    const auto model = fit_pca(sm, 3);
    CHECK(apply_pca(model, model.mean).cwiseAbs().maxCoeff() <= 1e-14);
    const auto joint = apply_pca(model, sm);
    for (Index j = 0; j < sm.size(); ++j) {
        const Vector<double> single = apply_pca(model, sm.values().col(j));
        CHECK((single - joint.values().col(j)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("subsample_per_class") {
    Rng rng(2);
    const SampleMatrixd sm(gaussian_matrix(rng, 3, 200), ClassPartition::from_counts({"a", "b"}, std::vector<Index>{100, 100}));

    SUBCASE("exhaustive selection leaves empty holdout") {
        const auto split = subsample_per_class(sm, 100, 1);
        CHECK(split.train.size() == 200);
        CHECK(split.holdout.empty());
        CHECK(split.holdout.num_classes() == 0);
    }
    SUBCASE("deterministic per seed, different across seeds") {
        const auto s1 = subsample_per_class(sm, 50, 1);
        const auto s1b = subsample_per_class(sm, 50, 1);
        const auto s2 = subsample_per_class(sm, 50, 2);
        CHECK(s1.train.values() == s1b.train.values());
        CHECK(s1.train.values() != s2.train.values());
        CHECK(s1.train.partition().size(0) == 50);
        CHECK(s1.train.partition().size(1) == 50);
        CHECK(s1.train.size() + s1.holdout.size() == sm.size());
        // disjoint and exhaustive: every original column appears exactly once
        std::multiset<double> all;
        for (Index j = 0; j < sm.size(); ++j) all.insert(sm.values()(0, j));
        std::multiset<double> parts;
        for (Index j = 0; j < s1.train.size(); ++j) parts.insert(s1.train.values()(0, j));
        for (Index j = 0; j < s1.holdout.size(); ++j) parts.insert(s1.holdout.values()(0, j));
        CHECK(all == parts);
    }
    SUBCASE("too-small class") {
        CHECK_THROWS_AS(subsample_per_class(sm, 101, 1), InputError);
    }
}

TEST_CASE("split_fraction_per_class keeps both sides non-empty") {
    Rng rng(4);
    const SampleMatrixd sm(gaussian_matrix(rng, 2, 7), ClassPartition::from_counts({"a", "b"}, std::vector<Index>{2, 5}));
    const auto split = split_fraction_per_class(sm, 0.5, 9);
    CHECK(split.train.partition().size(0) == 1);
    CHECK(split.train.partition().size(1) == 2);
    CHECK(split.holdout.partition().size(0) == 1);
    CHECK(split.holdout.partition().size(1) == 3);
}

TEST_CASE("select_columns regroups and drops empty classes") {
    Matrix<double> m(1, 5);
    m << 0, 1, 2, 3, 4;
    const SampleMatrixd sm(m, ClassPartition::from_counts({"a", "b", "c"}, std::vector<Index>{2, 2, 1}));
    const auto sel = select_columns(sm, {4, 0, 1});
    CHECK(sel.num_classes() == 2);
    CHECK(sel.partition().class_id(1) == "c");
    CHECK(sel.values()(0, 0) == 0.0);
    CHECK(sel.values()(0, 2) == 4.0);
    CHECK_THROWS_AS(select_columns(sm, {0, 0}), InputError);
    CHECK_THROWS_AS(select_columns(sm, {7}), InputError);
}
