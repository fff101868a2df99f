#include <doctest.h>

#include <algorithm>
#include <random>

#include "sopm/commands.hpp"
#include "sopm/error.hpp"
#include "sopm/miner.hpp"
#include "sopm/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace sopm;

using fixtures::partition_of;
using fixtures::random_case;

TEST_CASE("rank_cluster orders by distance and by motion direction") {
    const std::vector<double> sims{0.1, 0.5, 0.3};
    const std::vector<double> pms{0.9, 0.1, 0.5};
    auto p = partition_of({0, 0, 0, 1}, {true, false});
    const std::vector<double> sims4{0.1, 0.5, 0.3, 0.0};
    const std::vector<double> pms4{0.9, 0.1, 0.5, 0.0};
    auto r = rank_cluster(p, 0, sims4, pms4);
    CHECK(r.si == std::vector<int>{1, 3, 2});
    CHECK(r.mi == std::vector<int>{1, 3, 2});
    p.salient_flags = {false, false};
    r = rank_cluster(p, 0, sims4, pms4);
    CHECK(r.mi == std::vector<int>{2, 3, 1});
    CHECK_THROWS_AS(rank_cluster(p, 2, sims4, pms4), Error);
    CHECK_THROWS_AS(rank_cluster(p, 0, sims, pms), Error);
}

TEST_CASE("rank_cluster matches a full sort with id tie-breaks") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rc = random_case(rng);
        for (int c = 0; c < rc.partition.k; ++c) {
            const auto r = rank_cluster(rc.partition, c, rc.sims, rc.pms);
            const auto ids = oracle::members(rc.partition.assignment, c);
            CHECK(r.si == oracle::order_by(ids, rc.sims, false));
            CHECK(r.mi == oracle::order_by(ids, rc.pms, rc.partition.is_salient(c)));
        }
    }
}

TEST_CASE("dynamic cutoff") {
    // Ascending values, biggest jump between positions 8 and 9.
    const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.6, 1.7};
    CHECK(cutoff_lower_bound(10, 0.6) == 6);
    CHECK(dynamic_cutoff(v, 0.6) == 8);

    const std::vector<double> flat{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(dynamic_cutoff(flat, 0.6) == 6);

    // Descending lists are cut at their steepest fall as well.
    const std::vector<double> falling{1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.1, 0.05, 0.0};
    CHECK(dynamic_cutoff(falling, 0.6) == 7);

    CHECK(dynamic_cutoff(std::vector<double>{0.0, 1.0}, 0.6) == 1);
    CHECK_THROWS_AS(dynamic_cutoff(std::vector<double>{0.3}, 0.6), Error);
    CHECK_THROWS_AS(dynamic_cutoff(v, 1.0), Error);

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> gg(2, 60);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> vals(static_cast<std::size_t>(gg(rng)));
        for (auto& x : vals) x = std::round(u(rng) * 20) / 20;
        if (trial % 2 == 0) std::sort(vals.begin(), vals.end());
        const double xi = 0.05 + 0.9 * u(rng);
        const int g = static_cast<int>(vals.size());
        const int a = dynamic_cutoff(vals, xi);
        CHECK(a == oracle::cutoff(vals, xi));
        CHECK(a >= cutoff_lower_bound(g, xi));
        CHECK(a <= g - 1);
    }
}

TEST_CASE("singleton clusters keep their only member") {
    const auto p = partition_of({0, 1, 1, 1, 2, 3}, {true, false, false, false});
    const std::vector<double> sims{0, 0.1, 0.2, 0.3, 0, 0};
    const std::vector<double> pms{0.5, 0.1, 0.2, 0.3, 0.4, 0.6};
    const auto r = rank_cluster(p, 0, sims, pms);
    const auto cut = cluster_cutoffs(r, sims, pms, 0.6);
    CHECK(cut.alpha == 1);
    CHECK(cut.beta == 1);
}

TEST_CASE("training sets intersect the two top lists") {
    // a=1 b=2 c=3 d=4, one salient cluster.
    auto p = partition_of({0, 0, 0, 0, 1, 1, 1, 1}, {true, false});
    std::vector<ClusterRanking> rankings{{0, {1, 2, 3, 4}, {2, 1, 4, 3}}, {1, {5, 6, 7, 8}, {5, 6, 7, 8}}};
    std::vector<ClusterCutoffs> cuts{{2, 2}, {3, 3}};
    auto sets = build_training_sets(p, rankings, cuts);
    CHECK(sets.pos == std::set<int>{1, 2});
    CHECK(sets.neg == std::set<int>{5, 6, 7});

    // Disjoint tops fall back to the most typical member.
    rankings[0].mi = {3, 4, 1, 2};
    sets = build_training_sets(p, rankings, cuts);
    CHECK(sets.pos == std::set<int>{1});

    CHECK_THROWS_AS(build_training_sets(p, std::span(rankings).first(1), std::span(cuts).first(1)), Error);
}

TEST_CASE("training sets match a brute-force intersection on random clusters") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 150; ++trial) {
        const auto rc = random_case(rng);
        std::vector<ClusterRanking> rankings;
        std::vector<ClusterCutoffs> cuts;
        std::set<int> want_pos;
        std::set<int> want_neg;
        for (int c = 0; c < rc.partition.k; ++c) {
            rankings.push_back(rank_cluster(rc.partition, c, rc.sims, rc.pms));
            cuts.push_back(cluster_cutoffs(rankings.back(), rc.sims, rc.pms, 0.6));
            const auto both = oracle::top_intersection(rankings.back().si, cuts.back().alpha, rankings.back().mi,
                                                       cuts.back().beta);
            (rc.partition.is_salient(c) ? want_pos : want_neg).insert(both.begin(), both.end());
        }
        const auto sets = build_training_sets(rc.partition, rankings, cuts);
        CHECK(sets.pos == want_pos);
        CHECK(sets.neg == want_neg);
        CHECK(sets.pos.size() + sets.neg.size() <= rc.partition.assignment.size());
        const auto state = initial_state(sets, rc.partition.assignment.size());
        CHECK_NOTHROW(validate_state(state, rc.partition.assignment.size()));
    }
}

TEST_CASE("validate_state rejects broken partitions") {
    MiningState s;
    s.pos = {1};
    s.neg = {2};
    s.uncertain = {3};
    CHECK_NOTHROW(validate_state(s, 3));
    CHECK_THROWS_AS(validate_state(s, 4), Error);
    s.neg = {1, 2};
    CHECK_THROWS_AS(validate_state(s, 3), Error);
    s.neg = {2};
    s.uncertain = {3, 4};
    CHECK_THROWS_AS(validate_state(s, 3), Error);
}

TEST_CASE("mining iteration") {
    // Cluster 0 salient (ids 1..12), cluster 1 not (ids 13..16).
    std::vector<int> assignment(12, 0);
    assignment.insert(assignment.end(), 4, 1);
    const auto p = partition_of(assignment, {true, false});
    std::vector<double> sims;
    for (int i = 0; i < 16; ++i) sims.push_back(0.01 * ((i * 7) % 16));

    MiningState s;
    s.pos = {1};
    s.neg = {13};
    for (int id = 2; id <= 16; ++id) {
        if (id != 13) s.uncertain.insert(id);
    }
    std::vector<double> scores(16, 0.9);
    scores[1] = 0.2;   // id 2: salient cluster but predicted nonsalient
    scores[13] = 0.1;  // id 14
    scores[14] = 0.5;  // id 15: exactly 0.5 counts as nonsalient
    scores[15] = 0.8;  // id 16: nonsalient cluster predicted salient

    IterationAdmissions adm;
    const auto next = mining_iteration(s, scores, p, sims, 60.0, &adm);
    // Pos+ = ids 3..12 (10 candidates) -> 6 admitted, the smallest sims.
    std::vector<int> cands{3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::stable_sort(cands.begin(), cands.end(), [&](int a, int b) { return sims[a - 1] < sims[b - 1]; });
    cands.resize(6);
    CHECK(adm.pos == cands);
    // Neg+ = {14, 15} -> ceil(1.2) = 2 admitted.
    CHECK(adm.neg.size() == 2);
    CHECK(next.iteration == 1);
    CHECK(next.uncertain.contains(2));
    CHECK(next.uncertain.contains(16));
    for (int id : s.pos) CHECK(next.pos.contains(id));
    for (int id : s.neg) CHECK(next.neg.contains(id));
    CHECK_NOTHROW(validate_state(next, 16));

    // Nothing uncertain: only the counter moves.
    MiningState done;
    for (int id = 1; id <= 12; ++id) done.pos.insert(id);
    for (int id = 13; id <= 16; ++id) done.neg.insert(id);
    const auto same = mining_iteration(done, scores, p, sims, 60.0);
    CHECK(same.pos == done.pos);
    CHECK(same.neg == done.neg);
    CHECK(same.iteration == 1);
}

TEST_CASE("a perfect classifier eventually admits every salient proposal of the salient clusters") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        const auto rc = random_case(rng);
        const std::size_t n = rc.partition.assignment.size();
        std::vector<bool> truth(n);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto&& t : truth) t = u(rng) < 0.5;
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) scores[i] = truth[i] ? 0.99 : 0.01;

        MiningState s;
        for (int id = 1; id <= static_cast<int>(n); ++id) s.uncertain.insert(id);
        for (int it = 0; it < 60 && !s.uncertain.empty(); ++it) s = mining_iteration(s, scores, rc.partition, rc.sims, 60.0);

        std::set<int> expected;
        for (int id = 1; id <= static_cast<int>(n); ++id) {
            if (truth[static_cast<std::size_t>(id - 1)] && rc.partition.is_salient(rc.partition.cluster_of(id))) expected.insert(id);
        }
        CHECK(s.pos == expected);
    }
}

TEST_CASE("nearest resampling to 400 cells") {
    std::vector<double> v(37);
    for (int i = 0; i < 37; ++i) v[static_cast<std::size_t>(i)] = i;
    const auto r = resample_nearest(v);
    REQUIRE(r.size() == 400);
    for (int j = 0; j < 400; ++j) CHECK(r[static_cast<std::size_t>(j)] == static_cast<double>(j * 37 / 400));
    CHECK_THROWS_AS(resample_nearest(std::vector<double>{}), Error);
}

TEST_CASE("mining matrices") {
    std::vector<int> order(400);
    for (int i = 0; i < 400; ++i) order[static_cast<std::size_t>(i)] = 400 - i;  // best-first is id 400

    IterationTrace all;
    for (int id = 1; id <= 400; ++id) all.admitted_pos.push_back(id);
    IterationTrace half;
    for (int r = 0; r < 200; ++r) half.admitted_pos.push_back(order[static_cast<std::size_t>(r)]);
    const std::vector<IterationTrace> trace{all, half};
    const auto m = emit_mining_matrix(trace, order);
    REQUIRE(m.size() == 2);
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 20; ++c) {
            CHECK(m[0][r][c] == 1.0);
            CHECK(m[1][r][c] == (r < 10 ? 1.0 : 0.0));
        }
    }
    auto bad = order;
    bad[0] = bad[1];
    CHECK_THROWS_AS(emit_mining_matrix(trace, bad), Error);

    const std::vector<std::vector<MiningMatrix>> per{m, emit_mining_matrix(std::vector<IterationTrace>{half, half}, order)};
    const auto mean = average_matrices(per);
    CHECK(mean[0][0][0] == 1.0);
    CHECK(mean[0][19][19] == 0.5);
    for (const auto& mm : mean) {
        for (const auto& row : mm) {
            for (double x : row) CHECK((x >= 0.0 && x <= 1.0));
        }
    }
}

TEST_CASE("run_mining on a small synthetic sequence") {
    fixtures::TempDir dir("mine_small");
    auto spec = random_scene(2, 4, 24, 1);
    spec.feature_dim = 48;
    const auto seq = generate_sequence(spec, 1, dir / "seq");
    const auto features = load_sequence_features(seq.manifest);
    const auto pms = compute_sequence_pms(seq.manifest);

    PipelineConfig config;
    config.classifier_hidden = {16};
    const auto a = run_mining(seq.manifest, features, pms, config);
    const auto b = run_mining(seq.manifest, features, pms, config);
    CHECK(a.state == b.state);
    REQUIRE(a.trace.size() == 4);  // initial sets + 3 iterations
    for (std::size_t i = 1; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].pos_size >= a.trace[i - 1].pos_size);
        CHECK(a.trace[i].neg_size >= a.trace[i - 1].neg_size);
        CHECK(a.trace[i].classifier_losses.size() == 20);
    }
    CHECK(a.chunks.size() == 1);
    CHECK(a.chunks[0].nu >= 1);

    // Every admission is GT-salient in all but a few cases.
    const auto labels = oracle_label(seq.manifest, seq.gt_masks);
    for (const auto& t : a.trace) {
        if (t.admitted_pos.empty()) continue;
        std::size_t good = 0;
        for (int id : t.admitted_pos) good += labels[static_cast<std::size_t>(id - 1)] ? 1 : 0;
        CHECK(static_cast<double>(good) / static_cast<double>(t.admitted_pos.size()) >= 0.9);
    }

    // Two chunks of 12 frames each, ids offset into the full sequence.
    config.max_chunk_frames = 12;
    const auto chunked = run_mining(seq.manifest, features, pms, config);
    REQUIRE(chunked.chunks.size() == 2);
    CHECK(chunked.chunks[1].first_frame == 12);
    CHECK(chunked.chunks[1].first_id == static_cast<int>(seq.manifest.frames[0].proposals.size()) * 12 + 1);
    CHECK_NOTHROW(validate_state(chunked.state, seq.manifest.proposal_count()));

    config.k = 300;
    CHECK_THROWS_AS(run_mining(seq.manifest, features, pms, config), Error);
}
