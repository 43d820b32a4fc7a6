#include <catch2/catch_amalgamated.hpp>
#include <cstdio>

#include "dense_ref.hpp"
#include "gsqc/eigensolver.hpp"
#include "gsqc/hamiltonians.hpp"

using namespace gsqc;

namespace {

SparseOperator diag_op(const std::vector<double>& d) {
    std::vector<SparseOperator::Triplet> t;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] != 0.0) t.push_back({i, i, cplx(d[i])});
    return SparseOperator::from_triplets(d.size(), std::move(t));
}

// Random sparse Hermitian PSD operator built as shift + A^dagger A pattern on
// a dense small matrix, then converted entrywise.
SparseOperator random_psd(int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXcd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = (rng.uniform() < 0.05 || i == j) ? cplx(rng.normal(), rng.normal()) : cplx(0);
    Eigen::MatrixXcd h = a.adjoint() * a / double(dim);
    std::vector<SparseOperator::Triplet> t;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (std::abs(h(i, j)) > 1e-14)
                t.push_back({std::uint64_t(i), std::uint64_t(j), h(i, j)});
    return SparseOperator::from_triplets(std::uint64_t(dim), std::move(t));
}

}  // namespace

TEST_CASE("tiny fixed spectra come out exactly", "[eigensolver]") {
    const auto h = diag_op({0.0, 2.0});
    const auto r = lowest_eigenpairs(h, 2);
    REQUIRE(r.converged);
    REQUIRE(std::abs(r.energies[0]) < 1e-12);
    REQUIRE(std::abs(r.energies[1] - 2.0) < 1e-12);
    REQUIRE(r.multiplicity == 1);
    REQUIRE(r.gap_resolved);
    REQUIRE(std::abs(r.gap - 2.0) < 1e-12);

    const auto one = diag_op({3.0});
    const auto r1 = lowest_eigenpairs(one, 1);
    REQUIRE(std::abs(r1.energies[0] - 3.0) < 1e-12);
}

TEST_CASE("boost null vectors and the degeneracy report", "[eigensolver]") {
    BasisSpace sp({QubitColumn{"q", 2}});
    const auto h = assemble(sp, {make_boost(0, 1, 2.0)});
    const auto r = lowest_eigenpairs(h, 3);
    REQUIRE(r.energies[0] > -1e-12);
    REQUIRE(r.multiplicity == 2);  // one zero mode per bit value
    REQUIRE(r.gap_resolved);
    REQUIRE(std::abs(r.gap - 1.25) < 1e-9);
    for (int k = 0; k < 2; ++k) {
        const auto& v = r.vectors[std::size_t(k)];
        REQUIRE(std::abs(v[2] - 2.0 * v[0]) < 1e-8);
        REQUIRE(std::abs(v[3] - 2.0 * v[1]) < 1e-8);
    }
    // orthonormality of returned pairs
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const cplx d = vecops::dot(r.vectors[std::size_t(a)], r.vectors[std::size_t(b)]);
            REQUIRE(std::abs(d - (a == b ? 1.0 : 0.0)) < 1e-9);
        }
}

TEST_CASE("agreement with the dense oracle on random PSD operators", "[eigensolver]") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        const int dim = 120 + int(seed % 3) * 90;
        const auto h = random_psd(dim, seed);
        const auto dense = testref::dense_spectrum(h);
        SolveOptions o;
        o.seed = seed;
        const auto r = lowest_eigenpairs(h, 5, o);
        for (int i = 0; i < 5; ++i) {
            REQUIRE(std::abs(r.energies[std::size_t(i)] - dense.values[i]) < 1e-8);
            REQUIRE(r.residuals[std::size_t(i)] <= 1e-9);
        }
    }
}

TEST_CASE("fixed seed reproduces results bit for bit", "[eigensolver]") {
    const auto h = random_psd(150, 77);
    SolveOptions o;
    o.seed = 5;
    const auto a = lowest_eigenpairs(h, 3, o);
    const auto b = lowest_eigenpairs(h, 3, o);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(a.energies[std::size_t(i)] == b.energies[std::size_t(i)]);
        REQUIRE(std::memcmp(a.vectors[std::size_t(i)].data(), b.vectors[std::size_t(i)].data(),
                            a.vectors[std::size_t(i)].size() * sizeof(cplx)) == 0);
    }
}

TEST_CASE("adaptive gap search resolves degenerate bottoms", "[eigensolver]") {
    const auto g1 = gap_of(diag_op({0, 0, 1}));
    REQUIRE(g1.multiplicity == 2);
    REQUIRE(std::abs(g1.gap - 1.0) < 1e-10);
    REQUIRE_FALSE(g1.multiplicity_is_lower_bound);

    const auto g2 = gap_of(diag_op({0, 0, 0, 0, 0, 0.5, 0.9, 1.4}));
    REQUIRE(g2.multiplicity == 5);
    REQUIRE(std::abs(g2.gap - 0.5) < 1e-10);
}

TEST_CASE("wide zero clusters fall back to a range-started solve", "[eigensolver]") {
    std::vector<double> d(100, 0.0);
    for (int i = 60; i < 100; ++i) d[std::size_t(i)] = 0.4 + 0.05 * (i - 60);
    const auto g = gap_of(diag_op(d));
    REQUIRE(g.multiplicity_is_lower_bound);
    REQUIRE(g.multiplicity == 12);  // the adaptive cap, reported as a lower bound
    REQUIRE(std::abs(g.gap - 0.4) < 1e-8);
    REQUIRE(std::abs(g.e0) < 1e-12);
}

TEST_CASE("hard-boundary identity chain gap matches the dense oracle", "[eigensolver]") {
    BasisSpace sp({QubitColumn{"q", 3, true, Vec2::basis(0)}});
    const auto h = assemble(sp, {make_gate(0, 1, Mat2::identity()), make_gate(0, 2, Mat2::identity())});
    const auto dense = testref::dense_spectrum(h);
    const auto g = gap_of(h);
    REQUIRE(std::abs(g.e0 - dense.values[0]) < 1e-10);
    int mult = testref::null_dim(dense, 1e-8);
    REQUIRE(g.multiplicity == mult);
    REQUIRE(std::abs(g.gap - (dense.values[mult] - dense.values[0])) < 1e-10);
    // bit-1 branch loses its row-0 site, giving the lowest nonzero mode
    REQUIRE(std::abs(g.gap - (3.0 - std::sqrt(5.0)) / 2.0) < 1e-9);
}

TEST_CASE("decoupled columns give the smaller of the two gaps", "[eigensolver]") {
    BasisSpace sp({QubitColumn{"a", 2}, QubitColumn{"b", 2}});
    std::vector<HamiltonianTerm> terms{
        make_boundary(0, {0, 0, -1}, 100.0), make_boost(0, 1, 2.0),
        make_boundary(1, {0, 0, -1}, 100.0), make_boost(1, 1, 5.0),
    };
    const auto h = assemble(sp, terms);
    const auto dense = testref::dense_spectrum(h);
    const auto g = gap_of(h);
    REQUIRE(std::abs(g.gap - (dense.values[1] - dense.values[0])) < 1e-9);
}

TEST_CASE("non-hermitian input is rejected", "[eigensolver]") {
    std::vector<SparseOperator::Triplet> t{{0, 1, cplx(1.0)}};
    const auto bad = SparseOperator::from_triplets(3, std::move(t));
    REQUIRE_THROWS_AS(lowest_eigenpairs(bad, 1), validation_error);
}

TEST_CASE("plain cg solves consistent PSD systems in range", "[eigensolver]") {
    const auto h = random_psd(90, 3);
    Rng rng(4);
    std::vector<cplx> y(90), b(90), x;
    for (auto& v : y) v = cplx(rng.normal(), rng.normal());
    h.matvec(y, b);
    const auto st = cg(h, b, x, 1e-12, 20000);
    REQUIRE(st.converged);
    std::vector<cplx> hx(90);
    h.matvec(x, hx);
    vecops::axpy(cplx(-1.0), b, hx);
    REQUIRE(vecops::nrm2(hx) <= 1e-9 * vecops::nrm2(b));
}

TEST_CASE("null projection matches the exact projector", "[eigensolver]") {
    // PSD with a known 2-dim null space (boost on one column).
    BasisSpace sp({QubitColumn{"q", 2}});
    const auto h = assemble(sp, {make_boost(0, 1, 3.0)});
    const auto dense = testref::dense_spectrum(h);
    Eigen::MatrixXcd pnull = Eigen::MatrixXcd::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
        if (std::abs(dense.values[i]) < 1e-12)
            pnull += dense.vectors.col(i) * dense.vectors.col(i).adjoint();

    Rng rng(9);
    std::vector<cplx> v(4);
    for (auto& c : v) c = cplx(rng.normal(), rng.normal());
    Eigen::Vector4cd ve;
    for (int i = 0; i < 4; ++i) ve[i] = v[std::size_t(i)];
    Eigen::Vector4cd want = pnull * ve;
    want /= want.norm();

    auto w = v;
    const auto st = project_onto_null(h, w);
    REQUIRE(st.converged);
    Eigen::Vector4cd we;
    for (int i = 0; i < 4; ++i) we[i] = w[std::size_t(i)];
    // directions agree up to phase
    REQUIRE(std::abs(std::abs(we.dot(want)) - 1.0) < 1e-9);
}

TEST_CASE("null projection survives a tiny null component", "[eigensolver]") {
    BasisSpace sp({QubitColumn{"q", 2}});
    const auto h = assemble(sp, {make_boost(0, 1, 3.0)});
    // null direction (1,0,3,0)/sqrt(10); range direction (3,0,-1,0)/sqrt(10)
    const double s10 = std::sqrt(10.0);
    std::vector<cplx> v(4, cplx(0));
    v[0] = 1e-6 * (1.0 / s10) + 3.0 / s10;
    v[2] = 1e-6 * (3.0 / s10) - 1.0 / s10;
    const auto st = project_onto_null(h, v);
    REQUIRE(st.converged);
    REQUIRE(st.passes >= 1);
    const double n = vecops::nrm2(v);
    REQUIRE(std::abs(v[0] / n - 1.0 / s10) < 1e-7);
    REQUIRE(std::abs(v[2] / n - 3.0 / s10) < 1e-7);
}

TEST_CASE("eigenvector dumps round trip bit for bit", "[eigensolver]") {
    std::vector<std::vector<cplx>> vs{{cplx(1, 2), cplx(-0.5, 0)}, {cplx(0, 0), cplx(3.25, -1)}};
    const std::string path = "eigdump_test.bin";
    save_vectors(path, 2, vs);
    const auto [dim, back] = load_vectors(path);
    REQUIRE(dim == 2);
    REQUIRE(back.size() == 2);
    for (int i = 0; i < 2; ++i)
        REQUIRE(std::memcmp(back[std::size_t(i)].data(), vs[std::size_t(i)].data(),
                            2 * sizeof(cplx)) == 0);
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(load_vectors(path), validation_error);
}

TEST_CASE("inverse iteration matches the dense oracle past a wide null space", "[eigensolver]") {
    // Rank-deficient PSD operator: the dense oracle fixes the smallest
    // nonzero eigenvalue; the inverse route must reach it without ever
    // resolving the (60-dimensional) null cluster.
    const int dim = 260, rank = 200;
    Rng rng(404);
    Eigen::MatrixXcd a(rank, dim);
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = (rng.uniform() < 0.1) ? cplx(rng.normal(), rng.normal()) : cplx(0);
    const Eigen::MatrixXcd h = a.adjoint() * a / double(dim);
    std::vector<SparseOperator::Triplet> t;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (std::abs(h(i, j)) > 1e-14)
                t.push_back({std::uint64_t(i), std::uint64_t(j), h(i, j)});
    const auto op = SparseOperator::from_triplets(std::uint64_t(dim), std::move(t));

    const auto dense = testref::dense_spectrum(op);
    const int zeros = testref::null_dim(dense, 1e-10);
    REQUIRE(zeros >= dim - rank);
    const double lam1 = dense.values[zeros];
    const double got = smallest_nonzero_eigenvalue(op);
    REQUIRE(std::abs(got - lam1) <= 1e-5 * lam1);
}

TEST_CASE("inverse route resolves a tiny gap over a wide null cluster", "[eigensolver]") {
    std::vector<double> d(500, 0.0);
    d[200] = 3e-7;
    d[201] = 3e-7 * (1 + 1e-9);  // near-degenerate partner
    for (int i = 202; i < 500; ++i) d[std::size_t(i)] = 0.5 + 0.01 * (i - 202);
    const GapInfo g = circuit_gap(diag_op(d), {}, 10);  // force the inverse path
    REQUIRE(g.e0 == 0.0);
    REQUIRE(g.multiplicity_is_lower_bound);
    REQUIRE(std::abs(g.gap - 3e-7) <= 1e-12);
}
