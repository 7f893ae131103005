#include <doctest.h>

#include <cmath>

#include "mpcm/model/model.hpp"
#include "mpcm/tensor/gradcheck.hpp"
#include "support/toy.hpp"

using namespace mpcm;
using namespace mpcm::model;
using namespace mpcm::testsupport;

TEST_CASE("word_representation") {
  Rng rng(31);
  ModelConfig config = tiny_config(4, 3, 2, true);
  ModelParams params = tiny_params(config, 10, 8, 77);

  SUBCASE("char branch off returns the embedding rows exactly") {
    ModelConfig nochar = tiny_config(4, 3, 2, false);
    ModelParams p2 = tiny_params(nochar, 10, 8, 77);
    Tape tape(false);
    Tensor reps = word_representation(tape, {2, 5, 2}, {{}, {}, {}}, p2, nochar);
    CHECK(reps.shape() == Shape{3, 4});
    for (int j = 0; j < 4; ++j) {
      CHECK(reps.at(0, j) == p2.word_embeddings.at(2, j));
      CHECK(reps.at(1, j) == p2.word_embeddings.at(5, j));
    }
  }
  SUBCASE("identical tokens give identical rows; width is word+char") {
    Tape tape(false);
    Tensor reps = word_representation(tape, {3, 3}, {{2, 4}, {2, 4}}, params, config);
    CHECK(reps.cols() == config.word_repr_dim());
    for (int j = 0; j < reps.cols(); ++j) CHECK(reps.at(0, j) == reps.at(1, j));
  }
  SUBCASE("full-scale defaults give d = 400") {
    ModelConfig full;
    CHECK(full.word_repr_dim() == 400);
  }
  (void)rng;
}

TEST_CASE("relevancy and filter") {
  Tape tape(false);

  SUBCASE("passage word equal to a question word scores 1") {
    Tensor q = Tensor::from_vector({2, 2}, {1, 0, 0, 1});
    Tensor p = Tensor::from_vector({1, 2}, {0, 2});
    Tensor r = relevancy(tape, q, p, full_mask(2));
    CHECK(r.at(0) == doctest::Approx(1.0));
  }
  SUBCASE("single orthogonal question word scores 0") {
    Tensor q = Tensor::from_vector({1, 2}, {1, 0});
    Tensor p = Tensor::from_vector({1, 2}, {0, 3});
    CHECK(relevancy(tape, q, p, full_mask(1)).at(0) == doctest::Approx(0.0));
  }
  SUBCASE("max over question words") {
    Tensor q = Tensor::from_vector({2, 2}, {1, 0, 0, 1});
    Tensor p = Tensor::from_vector({1, 2}, {0.6, 0.8});
    CHECK(relevancy(tape, q, p, full_mask(2)).at(0) == doctest::Approx(0.8));
  }
  SUBCASE("positive scaling of a passage row leaves its relevancy unchanged") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const int m = 1 + static_cast<int>(rng.below(4));
      const int d = 2 + static_cast<int>(rng.below(5));
      std::vector<real_t> qv(static_cast<std::size_t>(m * d)), pv(static_cast<std::size_t>(d));
      for (auto& x : qv) x = static_cast<real_t>(rng.uniform(-1, 1));
      for (auto& x : pv) x = static_cast<real_t>(rng.uniform(-1, 1));
      Tensor q = Tensor::from_vector({m, d}, qv);
      Tensor p1 = Tensor::from_vector({1, d}, pv);
      const real_t alpha = static_cast<real_t>(rng.uniform(0.1, 5.0));
      for (auto& x : pv) x *= alpha;
      Tensor p2 = Tensor::from_vector({1, d}, pv);
      CHECK(relevancy(tape, q, p1, full_mask(static_cast<std::size_t>(m))).at(0) ==
            doctest::Approx(relevancy(tape, q, p2, full_mask(static_cast<std::size_t>(m))).at(0))
                .epsilon(1e-9));
    }
  }
  SUBCASE("filter scales rows") {
    Tensor p = Tensor::from_vector({3, 2}, {2, 4, 1, 1, 5, 5});
    Tensor r = Tensor::from_vector({3}, {0.5, 1.0, 0.0});
    Tensor f = filter_passage(tape, p, r);
    CHECK(f.values() == std::vector<real_t>{1, 2, 1, 1, 0, 0});
  }
}

TEST_CASE("match_passage") {
  Rng rng(41);
  const int h = 3, l = 2;

  auto random_states = [&](int n) {
    std::vector<real_t> v(static_cast<std::size_t>(n * h));
    for (auto& x : v) x = static_cast<real_t>(rng.uniform(-1, 1));
    return Tensor::from_vector({n, h}, std::move(v));
  };
  auto random_w = [&] {
    std::vector<real_t> v(static_cast<std::size_t>(l * h));
    for (auto& x : v) x = static_cast<real_t>(rng.uniform(-1, 1));
    return Tensor::from_vector({l, h}, std::move(v), true);
  };

  ModelConfig config = tiny_config(4, h, l, false);
  ModelParams params = tiny_params(config, 6, 4, 5);

  SUBCASE("single question step with tied matrices: full == max == mean") {
    ModelParams tied = params;
    Tensor w1 = random_w(), w2 = random_w();
    tied.w_full_fwd = tied.w_max_fwd = tied.w_mean_fwd = w1;
    tied.w_full_bwd = tied.w_max_bwd = tied.w_mean_bwd = w2;
    Tape tape(false);
    Tensor qf = random_states(1), qb = random_states(1);
    Tensor pf = random_states(4), pb = random_states(4);
    Tensor m = match_passage(tape, qf, qb, pf, pb, full_mask(1), tied, config);
    REQUIRE(m.cols() == 6 * l);
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < l; ++k) {
        CHECK(m.at(j, k) == doctest::Approx(m.at(j, 2 * l + k)).epsilon(1e-12));   // full==max fwd
        CHECK(m.at(j, k) == doctest::Approx(m.at(j, 4 * l + k)).epsilon(1e-12));   // full==mean fwd
        CHECK(m.at(j, l + k) == doctest::Approx(m.at(j, 3 * l + k)).epsilon(1e-12));
        CHECK(m.at(j, l + k) == doctest::Approx(m.at(j, 5 * l + k)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("max block dominates mean block when their matrices are tied") {
    ModelParams tied = params;
    tied.w_max_fwd = tied.w_mean_fwd = random_w();
    tied.w_max_bwd = tied.w_mean_bwd = random_w();
    Tape tape(false);
    Tensor qf = random_states(5), qb = random_states(5);
    Tensor pf = random_states(4), pb = random_states(4);
    Tensor m = match_passage(tape, qf, qb, pf, pb, full_mask(5), tied, config);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 2 * l; ++k)
        CHECK(m.at(j, 2 * l + k) >= m.at(j, 4 * l + k) - 1e-12);
  }
  SUBCASE("disabled strategies shrink the width; full-only gives 2l") {
    ModelConfig fullonly = config;
    fullonly.use_max = fullonly.use_mean = false;
    fullonly.perspectives = 50;
    ModelParams p2 = tiny_params(fullonly, 6, 4, 5);
    Tape tape(false);
    Tensor qf = random_states(2), qb = random_states(2);
    Tensor pf = random_states(3), pb = random_states(3);
    Tensor m = match_passage(tape, qf, qb, pf, pb, full_mask(2), p2, fullonly);
    CHECK(m.cols() == 100);
    CHECK(fullonly.matching_width() == 100);
  }
  SUBCASE("permuting question steps changes full blocks but not max/mean blocks") {
    Tape tape(false);
    Tensor qf = random_states(3), qb = random_states(3);
    Tensor pf = random_states(4), pb = random_states(4);
    // permutation (2,0,1) of question rows
    auto permute = [&](const Tensor& t) {
      std::vector<real_t> v;
      for (int i : {2, 0, 1})
        for (int j = 0; j < h; ++j) v.push_back(t.at(i, j));
      return Tensor::from_vector({3, h}, std::move(v));
    };
    Tensor m1 = match_passage(tape, qf, qb, pf, pb, full_mask(3), params, config);
    Tensor m2 = match_passage(tape, permute(qf), permute(qb), pf, pb, full_mask(3), params, config);
    bool full_changed = false;
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 2 * l; ++k)
        if (std::abs(static_cast<double>(m1.at(j, k) - m2.at(j, k))) > 1e-12) full_changed = true;
      for (int k = 2 * l; k < 6 * l; ++k)
        CHECK(m1.at(j, k) == doctest::Approx(m2.at(j, k)).epsilon(1e-12));
    }
    CHECK(full_changed);
  }
  SUBCASE("every matching coordinate lies in [-1, 1]") {
    Tape tape(false);
    for (int trial = 0; trial < 50; ++trial) {
      Tensor qf = random_states(3), qb = random_states(3);
      Tensor pf = random_states(5), pb = random_states(5);
      Tensor m = match_passage(tape, qf, qb, pf, pb, full_mask(3), params, config);
      for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m.data()[i] >= -1.0 - 1e-12);
        CHECK(m.data()[i] <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("aggregate") {
  Rng rng(51);
  ModelConfig config = tiny_config(4, 3, 2, false);
  ModelParams params = tiny_params(config, 6, 4, 15);
  const int width = config.matching_width();

  auto random_matching = [&](int n) {
    std::vector<real_t> v(static_cast<std::size_t>(n * width));
    for (auto& x : v) x = static_cast<real_t>(rng.uniform(-1, 1));
    return Tensor::from_vector({n, width}, std::move(v));
  };

  SUBCASE("output width is twice the hidden size (200 at full scale)") {
    Tape tape(false);
    Tensor a = aggregate(tape, random_matching(4), params, config);
    CHECK(a.shape() == Shape{4, 2 * config.lstm_hidden});
    ModelConfig full;
    CHECK(full.aggregated_width() == 200);
  }
  SUBCASE("N=1 reduces to single cell steps from zero state") {
    Tape tape(false);
    Tensor m = random_matching(1);
    Tensor a = aggregate(tape, m, params, config);
    auto [h, c] =
        lstm_cell(tape, row(tape, m, 0), Tensor::zeros({3}), Tensor::zeros({3}), params.aggregation.fwd);
    (void)c;
    for (int j = 0; j < 3; ++j) CHECK(a.at(0, j) == h.at(j));
  }
  SUBCASE("ablation replaces the BiLSTM with an affine width adapter") {
    ModelConfig noagg = config;
    noagg.use_aggregation = false;
    ModelParams p2 = tiny_params(noagg, 6, 4, 15);
    Tape tape(false);
    Tensor a = aggregate(tape, random_matching(4), p2, noagg);
    CHECK(a.shape() == Shape{4, 2 * noagg.lstm_hidden});
  }
  SUBCASE("gradients match finite differences on N=3") {
    Tensor m = random_matching(3);
    auto f = [&](Tape& t) { return sum(t, tanh(t, aggregate(t, m, params, config))); };
    auto report = grad_check(f,
                             {{"m", m},
                              {"agg.fwd.w", params.aggregation.fwd.w},
                              {"agg.bwd.w", params.aggregation.bwd.w}},
                             1e-5, 1e-4);
    INFO("max rel err ", report.max_error);
    CHECK(report.pass);
  }
}

TEST_CASE("predict_boundaries") {
  Rng rng(61);
  ModelConfig config = tiny_config(4, 3, 2, false);
  ModelParams params = tiny_params(config, 6, 4, 25);

  auto random_agg = [&](int n) {
    std::vector<real_t> v(static_cast<std::size_t>(n * 6));
    for (auto& x : v) x = static_cast<real_t>(rng.uniform(-1, 1));
    return Tensor::from_vector({n, 6}, std::move(v));
  };

  SUBCASE("single position is certain") {
    Tape tape(false);
    auto dists = predict_boundaries(tape, random_agg(1), full_mask(1), params);
    CHECK(dists.p_begin.at(0) == doctest::Approx(1.0));
    CHECK(dists.p_end.at(0) == doctest::Approx(1.0));
  }
  SUBCASE("identical rows give uniform distributions") {
    Tape tape(false);
    Tensor one = random_agg(1);
    std::vector<real_t> rep;
    for (int i = 0; i < 5; ++i)
      rep.insert(rep.end(), one.values().begin(), one.values().end());
    auto dists = predict_boundaries(tape, Tensor::from_vector({5, 6}, rep), full_mask(5), params);
    for (int j = 0; j < 5; ++j) {
      CHECK(dists.p_begin.at(j) == doctest::Approx(0.2).epsilon(1e-9));
      CHECK(dists.p_end.at(j) == doctest::Approx(0.2).epsilon(1e-9));
    }
  }
  SUBCASE("distributions sum to one at N=37") {
    Tape tape(false);
    auto dists = predict_boundaries(tape, random_agg(37), full_mask(37), params);
    double sb = 0, se = 0;
    for (int j = 0; j < 37; ++j) {
      sb += static_cast<double>(dists.p_begin.at(j));
      se += static_cast<double>(dists.p_end.at(j));
    }
    CHECK(sb == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(se == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("forward") {
  Rng rng(71);
  ModelConfig config = tiny_config(5, 3, 2, true);
  ModelParams params = tiny_params(config, 12, 9, 35);
  text::IndexedExample ex = random_indexed_example(rng, 12, 9, 3, 5);

  SUBCASE("inference is deterministic") {
    Tape t1(false), t2(false);
    auto d1 = forward_example(t1, ex, params, config);
    auto d2 = forward_example(t2, ex, params, config);
    CHECK(d1.p_begin.values() == d2.p_begin.values());
    CHECK(d1.p_end.values() == d2.p_end.values());
  }
  SUBCASE("dropout rate zero with training=true equals inference exactly") {
    ForwardOptions train_opts;
    train_opts.training = true;
    Tape t1(true), t2(false);
    auto d1 = forward_example(t1, ex, params, config, train_opts);
    auto d2 = forward_example(t2, ex, params, config);
    CHECK(d1.p_begin.values() == d2.p_begin.values());
    CHECK(d1.p_end.values() == d2.p_end.values());
  }
  SUBCASE("dropout is reproducible under the same key and differs across streams") {
    ModelConfig dcfg = config;
    dcfg.dropout_rate = static_cast<real_t>(0.3);
    ForwardOptions o1{true, 9, 1};
    Tape t1(false), t2(false), t3(false);
    auto d1 = forward_example(t1, ex, params, dcfg, o1);
    auto d2 = forward_example(t2, ex, params, dcfg, o1);
    CHECK(d1.p_begin.values() == d2.p_begin.values());
    ForwardOptions o2{true, 9, 2};
    auto d3 = forward_example(t3, ex, params, dcfg, o2);
    CHECK(d1.p_begin.values() != d3.p_begin.values());
  }
  SUBCASE("all parameter gradients finite across 100 seeds") {
    for (int seed = 0; seed < 100; ++seed) {
      Rng r(static_cast<std::uint64_t>(seed) + 1000);
      text::IndexedExample e = random_indexed_example(r, 12, 9, 1 + static_cast<int>(r.below(4)),
                                                      1 + static_cast<int>(r.below(6)));
      Tape tape;
      auto dists = forward_example(tape, e, params, config);
      Tensor loss = span_loss(tape, dists, e.answer_begin, e.answer_end);
      for (auto& [name, t] : params.trainable()) t.zero_grad();
      tape.backward(loss);
      for (auto& [name, t] : params.trainable()) {
        bool finite = true;
        for (real_t g : t.grad()) finite &= std::isfinite(static_cast<double>(g));
        INFO("seed ", seed, " param ", name);
        CHECK(finite);
      }
    }
  }
}

TEST_CASE("span_loss") {
  ModelConfig config = tiny_config(5, 3, 2, false);
  BoundaryDistributions d;
  d.mask = full_mask(4);
  Tape tape(false);

  SUBCASE("perfect prediction has zero loss") {
    d.p_begin = Tensor::from_vector({4}, {0, 1, 0, 0});
    d.p_end = Tensor::from_vector({4}, {0, 0, 1, 0});
    CHECK(span_loss(tape, d, 2, 3).item() == doctest::Approx(0.0));
  }
  SUBCASE("uniform over N=4 costs 2 ln 4") {
    d.p_begin = Tensor::constant({4}, static_cast<real_t>(0.25));
    d.p_end = Tensor::constant({4}, static_cast<real_t>(0.25));
    CHECK(span_loss(tape, d, 1, 4).item() == doctest::Approx(2 * std::log(4.0)).epsilon(1e-9));
  }
  SUBCASE("zero probability is clamped to a finite loss") {
    d.p_begin = Tensor::from_vector({4}, {0, 1, 0, 0});
    d.p_end = Tensor::from_vector({4}, {0, 0, 1, 0});
    const double loss = static_cast<double>(span_loss(tape, d, 1, 1).item());
    CHECK(std::isfinite(loss));
    CHECK(loss <= 2 * std::log(1e12) + 1e-6);
  }
  SUBCASE("gold index on masked position raises") {
    d.p_begin = Tensor::constant({4}, static_cast<real_t>(0.25));
    d.p_end = Tensor::constant({4}, static_cast<real_t>(0.25));
    d.mask = Mask{1, 1, 1, 0};
    CHECK_THROWS_AS(span_loss(tape, d, 4, 4), InvalidInputError);
  }
  (void)config;
}

TEST_CASE("full-model gradient check on a toy example") {
  Rng rng(81);
  ModelConfig config = tiny_config(6, 3, 2, true);
  ModelParams params = tiny_params(config, 10, 8, 45);
  text::IndexedExample ex = random_indexed_example(rng, 10, 8, 2, 4);

  auto f = [&](Tape& tape) {
    auto dists = forward_example(tape, ex, params, config);
    return span_loss(tape, dists, ex.answer_begin, ex.answer_end);
  };
  auto report = grad_check(f, params.trainable(), 1e-5, 1e-4);
  INFO("max rel err ", report.max_error, " over ", report.coordinates_checked, " coordinates");
  CHECK(report.pass);
}

TEST_CASE("batched and single-example forwards agree") {
  Rng rng(91);
  ModelConfig config = tiny_config(5, 3, 2, true);
  ModelParams params = tiny_params(config, 14, 9, 55);

  std::vector<text::IndexedExample> examples;
  for (int e = 0; e < 7; ++e) {
    auto ie = random_indexed_example(rng, 14, 9, 1 + static_cast<int>(rng.below(4)),
                                     2 + static_cast<int>(rng.below(7)));
    ie.example_index = e;
    examples.push_back(ie);
  }
  auto batches = text::make_batches(examples, 3, 13);

  for (const auto& batch : batches) {
    Tape tape(false);
    auto batched = forward_batch(tape, batch, params, config);
    for (int b = 0; b < batch.size; ++b) {
      const text::IndexedExample* src = nullptr;
      for (const auto& ie : examples)
        if (ie.example_index == batch.example_indices[static_cast<std::size_t>(b)]) src = &ie;
      REQUIRE(src != nullptr);
      Tape solo_tape(false);
      auto solo = forward_example(solo_tape, *src, params, config);
      REQUIRE(solo.p_begin.size() == batched[static_cast<std::size_t>(b)].p_begin.size());
      for (std::size_t i = 0; i < solo.p_begin.size(); ++i) {
        CHECK(std::abs(static_cast<double>(solo.p_begin.data()[i] -
                                           batched[static_cast<std::size_t>(b)].p_begin.data()[i])) <
              1e-9);
        CHECK(std::abs(static_cast<double>(solo.p_end.data()[i] -
                                           batched[static_cast<std::size_t>(b)].p_end.data()[i])) <
              1e-9);
      }
    }
  }
}
