#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "softsense/errors.hpp"
#include "softsense/graph.hpp"
#include "softsense/rng.hpp"
#include "test_helpers.hpp"

using namespace softsense;

namespace {

// Reference top-k: sort candidates by (score desc, index asc), keep the first k.
Adjacency brute_force_topk(const Matrix& sim, std::size_t k) {
    const std::size_t n = sim.rows();
    Adjacency adj(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> cand;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) cand.push_back(j);
        std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            if (sim(i, a) != sim(i, b)) return sim(i, a) > sim(i, b);
            return a < b;
        });
        for (std::size_t r = 0; r < k; ++r) adj.set(i, cand[r], 1);
    }
    return adj;
}

Matrix random_embeddings(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix z(n, d);
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    return z;
}

}  // namespace

TEST_CASE("init_embeddings is deterministic and shaped n x d") {
    const Matrix a = init_embeddings(23, 64, 7);
    const Matrix b = init_embeddings(23, 64, 7);
    CHECK(a.rows() == 23);
    CHECK(a.cols() == 64);
    CHECK(a == b);
    CHECK(init_embeddings(23, 64, 8) != a);
    CHECK_THROWS_AS(init_embeddings(1, 8, 0), ConfigError);

    // no zero rows
    for (std::size_t i = 0; i < a.rows(); ++i) {
        CHECK(std::sqrt(dot(a.row(i), a.row(i))) > 1e-12);
    }
}

TEST_CASE("cosine similarity matches hand values") {
    Matrix z(3, 2);
    z(0, 0) = 1.0; z(0, 1) = 0.0;   // e1
    z(1, 0) = 1.0; z(1, 1) = 1.0;   // diagonal direction
    z(2, 0) = 0.0; z(2, 1) = 3.0;   // orthogonal to e1
    const Matrix sim = cosine_similarity_matrix(z);

    CHECK(sim(0, 1) == doctest::Approx(0.7071067811865476).epsilon(1e-12));  // 1/sqrt(2)
    CHECK(sim(0, 2) == doctest::Approx(0.0));
    CHECK(sim(1, 2) == doctest::Approx(0.7071067811865476).epsilon(1e-12));
    CHECK(sim(1, 0) == sim(0, 1));  // symmetric

    Matrix same(2, 2);
    same(0, 0) = 2.0; same(0, 1) = -1.0;
    same(1, 0) = 4.0; same(1, 1) = -2.0;  // same direction, doubled
    CHECK(cosine_similarity_matrix(same)(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cosine similarity rejects zero-norm rows naming the sensor") {
    Matrix z(3, 4, 1.0);
    for (std::size_t c = 0; c < 4; ++c) z(2, c) = 0.0;
    CHECK_THROWS_WITH_AS(cosine_similarity_matrix(z), doctest::Contains("sensor 2"),
                         std::runtime_error);
}

TEST_CASE("cosine similarity is scale invariant within 1e-12") {
    const Matrix z = random_embeddings(8, 5, 41);
    Matrix scaled = z;
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled.data()[i] *= 37.5;
    CHECK(test::max_abs_diff(cosine_similarity_matrix(z), cosine_similarity_matrix(scaled)) <=
          1e-12);
}

TEST_CASE("topk_adjacency hand case and edge cases") {
    // destination 0 has candidate scores e(1->0) = 0.9, e(2->0) = 0.1
    Matrix e(3, 3, 0.0);
    e(0, 1) = 0.9;
    e(0, 2) = 0.1;
    e(1, 0) = 0.9; e(1, 2) = 0.5;
    e(2, 0) = 0.1; e(2, 1) = 0.5;
    const Adjacency adj = topk_adjacency(e, 1);
    CHECK(adj.at(0, 1) == 1);
    CHECK(adj.at(0, 2) == 0);
    CHECK(adj == brute_force_topk(e, 1));
    CHECK(neighbors(adj, 0) == std::vector<std::size_t>{1});
    CHECK(neighbors(adj, 1) == std::vector<std::size_t>{0});

    const Adjacency full = topk_adjacency(e, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(full.at(i, i) == 0);
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) CHECK(full.at(i, j) == 1);
    }
    const Adjacency none = topk_adjacency(e, 0);
    CHECK(std::accumulate(none.edges.begin(), none.edges.end(), 0) == 0);
    CHECK(neighbors(none, 0).empty());

    CHECK_THROWS_AS(topk_adjacency(e, 3), ConfigError);
}

TEST_CASE("topk_adjacency breaks ties toward the lower index") {
    Matrix e(3, 3, 0.5);  // all candidates tie
    const Adjacency adj = topk_adjacency(e, 1);
    CHECK(adj.at(0, 1) == 1);  // 1 < 2
    CHECK(adj.at(1, 0) == 1);
    CHECK(adj.at(2, 0) == 1);
}

TEST_CASE("topk rows sum to k and match brute force under monotone transforms") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + rng.below(6);  // up to 8
        const std::size_t k = rng.below(n);
        Matrix e(n, n);
        for (std::size_t i = 0; i < e.size(); ++i) e.data()[i] = 2.0 * rng.uniform() - 1.0;

        const Adjacency adj = topk_adjacency(e, k);
        CHECK(adj == brute_force_topk(e, k));
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t row_sum = 0;
            for (std::size_t j = 0; j < n; ++j) row_sum += adj.at(i, j);
            CHECK(row_sum == k);
            CHECK(adj.at(i, i) == 0);
        }

        // strictly monotone transforms leave the selected sets unchanged
        for (const auto f : {+[](double v) { return 2.0 * v + 1.0; },
                             +[](double v) { return std::tanh(v); },
                             +[](double v) { return v * v * v; }}) {
            Matrix t = e;
            for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = f(t.data()[i]);
            CHECK(topk_adjacency(t, k) == adj);
        }
    }
}

TEST_CASE("neighbors lists in-neighbors in ascending order") {
    Matrix e(5, 5, 0.0);
    e(3, 4) = 0.9;
    e(3, 0) = 0.8;
    e(3, 2) = 0.7;
    const Adjacency adj = topk_adjacency(e, 3);
    CHECK(neighbors(adj, 3) == std::vector<std::size_t>{0, 2, 4});

    const Adjacency full = topk_adjacency(e, 4);
    CHECK(neighbors(full, 2) == std::vector<std::size_t>{0, 1, 3, 4});
    CHECK_THROWS_AS(neighbors(adj, 9), ShapeError);
}

TEST_CASE("symmetrize unions edges with their reverses") {
    Matrix e(4, 4, 0.0);
    e(0, 2) = 0.9;  // only 2 -> 0 selected for destination 0
    e(1, 3) = 0.8;
    e(2, 1) = 0.7;
    e(3, 0) = 0.6;
    const Adjacency adj = topk_adjacency(e, 1);
    const Adjacency sym = symmetrize(adj);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(sym.at(i, j) == (adj.at(i, j) | adj.at(j, i)));
        }
        CHECK(sym.at(i, i) == 0);
    }
    CHECK(graph_for(init_embeddings(5, 3, 1), 2, false) ==
          topk_adjacency(cosine_similarity_matrix(init_embeddings(5, 3, 1)), 2));
}

TEST_CASE("graph recomputation from identical embeddings is deterministic") {
    const Matrix z = random_embeddings(7, 4, 99);
    const LearnedGraph g1 = learn_graph(z, 3);
    const LearnedGraph g2 = learn_graph(z, 3);
    CHECK(g1.adj == g2.adj);
    CHECK(g1.similarity == g2.similarity);
}
