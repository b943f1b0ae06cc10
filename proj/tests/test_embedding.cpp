#include <cmath>
#include <memory>

#include "doctest.h"
#include "kbc/embedding.hpp"

using namespace kbc;

namespace {

SparseVector sparse_of(std::vector<SparseVector::Entry> entries, std::uint32_t dim) {
  return SparseVector::from_unsorted(std::move(entries), dim);
}

EmbeddingModel random_model(std::uint32_t de, std::uint32_t dt, std::int32_t d,
                            std::uint64_t seed) {
  return EmbeddingModel::random_init(de, dt, d, seed);
}

double margin_entity_pair(const EmbeddingModel& m, const SparseVector& phi,
                          const SparseVector& phi_neg, const SparseVector& psi) {
  return score_embedding(m, phi_neg, psi) - score_embedding(m, phi, psi);
}

double margin_type_pair(const EmbeddingModel& m, const SparseVector& phi, const SparseVector& psi,
                        const SparseVector& psi_neg) {
  return score_embedding(m, phi, psi_neg) - score_embedding(m, phi, psi);
}

struct ToyProblem {
  std::shared_ptr<Vocab> entities = std::make_shared<Vocab>();
  std::shared_ptr<Vocab> types = std::make_shared<Vocab>();
  std::unique_ptr<KBSnapshot> train;
  FeatureMatrix features;
  std::vector<SparseVector> type_feats;

  explicit ToyProblem(const std::vector<std::pair<std::string, std::string>>& facts) {
    train = std::make_unique<KBSnapshot>(load_snapshot(facts, entities, types));
    auto space = FeatureSpace::make(std::vector<std::pair<char, std::uint32_t>>{
        {'D', static_cast<std::uint32_t>(entities->size())}});
    features = FeatureMatrix(space);
    for (EntityId e = 0; e < entities->size(); ++e) {
      SparseVector row(space.total_dim());
      row.push_back(static_cast<std::uint32_t>(e), 1.0);
      features.set_row(e, row);
    }
    type_feats = one_hot_type_features(types->size());
  }
};

}  // namespace

TEST_CASE("score_embedding computes the bilinear form") {
  EmbeddingModel zero;
  zero.entity_dim = 2;
  zero.type_dim = 2;
  zero.embed_dim = 1;
  zero.u.assign(2, 0.0);
  zero.v.assign(2, 0.0);
  auto phi = sparse_of({{0, 1.0}}, 2);
  auto psi = sparse_of({{1, 1.0}}, 2);
  CHECK(score_embedding(zero, phi, psi) == 0.0);

  // d=1: U^T phi = 2, psi^T V = 3 -> 6
  EmbeddingModel m = zero;
  m.u = {2.0, 5.0};
  m.v = {7.0, 3.0};
  CHECK(score_embedding(m, phi, psi) == doctest::Approx(6.0));

  SparseVector wrong(3);
  CHECK_THROWS_AS(score_embedding(m, wrong, psi), DataError);
}

TEST_CASE("one-hot psi with identity V reduces to a linear model on U columns") {
  const std::uint32_t de = 6;
  const std::int32_t d = 4;  // = number of types
  EmbeddingModel m = random_model(de, static_cast<std::uint32_t>(d), d, 17);
  // overwrite V with the identity
  std::fill(m.v.begin(), m.v.end(), 0.0);
  for (std::int32_t i = 0; i < d; ++i) {
    m.v[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] =
        1.0;
  }
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SparseVector::Entry> entries;
    for (std::uint32_t i = 0; i < de; ++i) {
      if (rng.next_double() < 0.6) entries.push_back({i, rng.uniform(-1.0, 1.0)});
    }
    auto phi = sparse_of(std::move(entries), de);
    for (TypeId t = 0; t < d; ++t) {
      double expected = 0.0;
      for (const auto& e : phi.entries()) expected += e.value * m.u_at(e.index, t);
      double got = score_embedding(m, phi, type_one_hot(t, d));
      CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("score_embedding is bilinear") {
  EmbeddingModel m = random_model(5, 3, 4, 23);
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<SparseVector::Entry> pe, qe;
    for (std::uint32_t i = 0; i < 5; ++i) {
      if (rng.next_double() < 0.7) pe.push_back({i, rng.uniform(-1.0, 1.0)});
    }
    for (std::uint32_t i = 0; i < 3; ++i) {
      if (rng.next_double() < 0.7) qe.push_back({i, rng.uniform(-1.0, 1.0)});
    }
    auto phi = sparse_of(pe, 5);
    auto psi = sparse_of(qe, 3);
    double alpha = rng.uniform(-3.0, 3.0);
    auto scaled = phi;
    scaled.scale(alpha);
    CHECK(score_embedding(m, scaled, psi) ==
          doctest::Approx(alpha * score_embedding(m, phi, psi)).epsilon(1e-9));
    auto psi_scaled = psi;
    psi_scaled.scale(alpha);
    CHECK(score_embedding(m, phi, psi_scaled) ==
          doctest::Approx(alpha * score_embedding(m, phi, psi)).epsilon(1e-9));
  }
}

TEST_CASE("update directions match finite-difference margin gradients") {
  Rng rng(31);
  const std::uint32_t de = 7, dt = 4;
  const std::int32_t d = 3;
  int checked = 0;
  for (int trial = 0; trial < 300 && checked < 60; ++trial) {
    EmbeddingModel m = random_model(de, dt, d, 1000 + static_cast<std::uint64_t>(trial));
    std::vector<SparseVector::Entry> pe, ne;
    for (std::uint32_t i = 0; i < de; ++i) {
      if (rng.next_double() < 0.6) pe.push_back({i, rng.uniform(-1.0, 1.0)});
      if (rng.next_double() < 0.6) ne.push_back({i, rng.uniform(-1.0, 1.0)});
    }
    auto phi = sparse_of(pe, de);
    auto phi_neg = sparse_of(ne, de);
    TypeId t = static_cast<TypeId>(rng.below(dt));
    TypeId t_neg = static_cast<TypeId>((t + 1 + rng.below(dt - 1)) % dt);
    auto psi = type_one_hot(t, dt);
    auto psi_neg = type_one_hot(t_neg, dt);

    const double h = 1e-6;
    auto fd_check_u = [&](const std::vector<MatrixEntry>& grad, auto margin_fn) {
      for (const MatrixEntry& g : grad) {
        std::size_t flat = static_cast<std::size_t>(g.row) * static_cast<std::size_t>(d) +
                           static_cast<std::size_t>(g.col);
        EmbeddingModel plus = m, minus = m;
        plus.u[flat] += h;
        minus.u[flat] -= h;
        double fd = (margin_fn(plus) - margin_fn(minus)) / (2.0 * h);
        CHECK(std::abs(fd - g.value) <= 1e-5 * std::max({1.0, std::abs(fd), std::abs(g.value)}));
      }
    };
    auto fd_check_v = [&](const std::vector<MatrixEntry>& grad, auto margin_fn) {
      for (const MatrixEntry& g : grad) {
        std::size_t flat = static_cast<std::size_t>(g.row) * static_cast<std::size_t>(d) +
                           static_cast<std::size_t>(g.col);
        EmbeddingModel plus = m, minus = m;
        plus.v[flat] += h;
        minus.v[flat] -= h;
        double fd = (margin_fn(plus) - margin_fn(minus)) / (2.0 * h);
        CHECK(std::abs(fd - g.value) <= 1e-5 * std::max({1.0, std::abs(fd), std::abs(g.value)}));
      }
    };

    // only pairs the trainer would update, i.e. violated ones
    if (margin_entity_pair(m, phi, phi_neg, psi) + 1.0 > 0.0) {
      std::vector<MatrixEntry> du, dv;
      embedding_entity_pair_gradient(m, phi, phi_neg, psi, du, dv);
      auto margin = [&](const EmbeddingModel& model) {
        return margin_entity_pair(model, phi, phi_neg, psi);
      };
      fd_check_u(du, margin);
      fd_check_v(dv, margin);
      ++checked;
    }
    if (margin_type_pair(m, phi, psi, psi_neg) + 1.0 > 0.0) {
      std::vector<MatrixEntry> du, dv;
      embedding_type_pair_gradient(m, phi, psi, psi_neg, du, dv);
      auto margin = [&](const EmbeddingModel& model) {
        return margin_type_pair(model, phi, psi, psi_neg);
      };
      fd_check_u(du, margin);
      fd_check_v(dv, margin);
      ++checked;
    }
  }
  CHECK(checked >= 60);
}

TEST_CASE("zero epochs keep the random initialization") {
  ToyProblem toy({{"a", "/t1"}, {"b", "/t2"}});
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.negatives = {1, 1, 9};
  cfg.seed = 9;
  EmbeddingModel trained =
      train_embedding(toy.train->facts(), toy.features, toy.type_feats, *toy.train, cfg, 4);
  EmbeddingModel init = EmbeddingModel::random_init(toy.features.dim(), 2, 4, 9);
  CHECK(trained.u == init.u);
  CHECK(trained.v == init.v);
}

TEST_CASE("random init is seed stable and scale bounded") {
  EmbeddingModel a = EmbeddingModel::random_init(6, 3, 5, 42);
  EmbeddingModel b = EmbeddingModel::random_init(6, 3, 5, 42);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  EmbeddingModel c = EmbeddingModel::random_init(6, 3, 5, 43);
  CHECK(a.u != c.u);
  double bound = 1.0 / std::sqrt(5.0);
  for (double x : a.u) CHECK(std::abs(x) <= bound);
  for (double x : a.v) CHECK(std::abs(x) <= bound);
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  ToyProblem toy({{"a", "/t1"}, {"b", "/t2"}, {"c", "/t1"}});
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.negatives = {1, 1, 12};
  cfg.seed = 12;
  EmbeddingModel m1 =
      train_embedding(toy.train->facts(), toy.features, toy.type_feats, *toy.train, cfg, 3);
  EmbeddingModel m2 =
      train_embedding(toy.train->facts(), toy.features, toy.type_feats, *toy.train, cfg, 3);
  CHECK(m1.u == m2.u);
  CHECK(m1.v == m2.v);
}

TEST_CASE("embedding separates separable toy data") {
  ToyProblem toy({{"a", "/t1"}, {"b", "/t1"}, {"c", "/t2"}, {"d", "/t2"}, {"e", "/t3"},
                  {"f", "/t3"}});
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.negatives = {1, 1, 21};
  cfg.seed = 21;
  EmbeddingModel model =
      train_embedding(toy.train->facts(), toy.features, toy.type_feats, *toy.train, cfg, 3);
  CHECK(count_embedding_violations(model, toy.train->facts(), toy.features, toy.type_feats,
                                   *toy.train) == 0);
}

TEST_CASE("first epoch decreases the frozen-negative objective on average") {
  double improved = 0.0;
  const int seeds = 6;
  for (int s = 0; s < seeds; ++s) {
    ToyProblem toy({{"a", "/t1"}, {"b", "/t1"}, {"c", "/t2"}, {"d", "/t2"}, {"e", "/t3"}});
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.negatives = {1, 1, 300 + static_cast<std::uint64_t>(s)};
    cfg.seed = 300 + static_cast<std::uint64_t>(s);
    cfg.negative_mode = NegativeMode::kFixed;
    auto negs = sample_all_negatives(toy.train->facts(), *toy.train, cfg.negatives, 0);
    EmbeddingModel before = EmbeddingModel::random_init(toy.features.dim(), 3, 4, cfg.seed);
    double obj_before =
        embedding_objective(before, toy.train->facts(), toy.features, toy.type_feats, negs);
    EmbeddingModel after =
        train_embedding(toy.train->facts(), toy.features, toy.type_feats, *toy.train, cfg, 4);
    double obj_after =
        embedding_objective(after, toy.train->facts(), toy.features, toy.type_feats, negs);
    improved += obj_before - obj_after;
  }
  CHECK(improved / seeds > 0.0);
}
