#include <doctest.h>

#include <cmath>

#include "catkd/adversary.hpp"
#include "catkd/protocol.hpp"
#include "catkd/rng.hpp"
#include "catkd/schmidt.hpp"

using namespace catkd;

namespace {

struct MonteCarlo {
    int undetected = 0;
    int detected = 0;
    int pairs_with_alice_max = 0;
    int pairs_with_bob_max = 0;
    bool pairs_exact = true;  // every undetected trial hit expected_pairs
};

MonteCarlo run_trials(const AttackStrategy& strategy, RoundConfig cfg,
                      int trials, std::uint64_t seed0, int expected_pairs = -1) {
    MonteCarlo mc;
    for (int t = 0; t < trials; ++t) {
        cfg.seed = derive_seed(seed0, static_cast<std::uint64_t>(t));
        Session session(cfg, 1);
        auto eve = make_adversary(strategy);
        session.run_round(*eve);
        const auto& ledger = eve->ledger();
        if (ledger.detected) {
            ++mc.detected;
        } else {
            ++mc.undetected;
            if (expected_pairs >= 0 &&
                (ledger.pairs_with_alice != expected_pairs ||
                 ledger.pairs_with_bob != expected_pairs))
                mc.pairs_exact = false;
        }
        mc.pairs_with_alice_max =
            std::max(mc.pairs_with_alice_max, ledger.pairs_with_alice);
        mc.pairs_with_bob_max =
            std::max(mc.pairs_with_bob_max, ledger.pairs_with_bob);
    }
    return mc;
}

double sigma_of(double p, int n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST_CASE("ledger invalidation wipes the detecting verifier's pairs") {
    EveLedger ledger;
    ledger.pairs_with_alice = 3;
    ledger.pairs_with_bob = 7;
    ledger.invalidate(Party::Bob);
    CHECK(ledger.pairs_with_bob == 0);
    CHECK(ledger.pairs_with_alice == 3);
    CHECK(ledger.invalidated_pairs == 7);
    ledger.invalidate(Party::Alice);
    CHECK(ledger.pairs_with_alice == 0);
    CHECK(ledger.invalidated_pairs == 10);
}

TEST_CASE("passive adversary is never detected and gains nothing") {
    AttackStrategy strat;  // Kind::Passive
    RoundConfig cfg;
    cfg.challenge_pairs = 20;
    cfg.tested_pairs = 4;
    auto mc = run_trials(strat, cfg, 200, 11, 0);
    CHECK(mc.detected == 0);
    CHECK(mc.pairs_with_alice_max == 0);
    CHECK(mc.pairs_with_bob_max == 0);
    CHECK(mc.pairs_exact);
}

TEST_CASE("impersonation is detected at rate 1 - p0^K'") {
    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::Impersonation;
    strat.impersonated = Party::Alice;

    RoundConfig cfg;
    cfg.challenge_pairs = 101;
    cfg.tested_pairs = 50;

    const int trials = 20000;
    auto mc = run_trials(strat, cfg, trials, 12);
    double p0 = reference_fidelity_bound();
    double expected_undetected = std::pow(p0, 50);  // about 0.626
    double rate = static_cast<double>(mc.undetected) / trials;
    CHECK(std::abs(rate - expected_undetected) <
          4 * sigma_of(expected_undetected, trials));
    // Eve ends each undetected round holding pairs with Bob, never Alice.
    CHECK(mc.pairs_with_bob_max > 0);
    CHECK(mc.pairs_with_alice_max == 0);
}

TEST_CASE("more tests catch an impersonator more often") {
    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::Impersonation;
    RoundConfig cfg;
    cfg.challenge_pairs = 101;
    const int trials = 4000;
    double last = 1.1;
    for (int kp : {5, 20, 50}) {
        cfg.tested_pairs = kp;
        auto mc = run_trials(strat, cfg, trials, 13 + kp);
        double undetected = static_cast<double>(mc.undetected) / trials;
        CHECK(undetected < last);
        last = undetected;
    }
}

TEST_CASE("type I options 1 and 2: no catalyst pairs gained") {
    RoundConfig cfg;
    cfg.challenge_pairs = 100;
    cfg.tested_pairs = 10;

    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::TypeI;
    strat.type1_option = 1;
    strat.budget = 10;
    auto relay = run_trials(strat, cfg, 300, 21, 0);
    CHECK(relay.detected == 0);  // a pure relay is invisible
    CHECK(relay.pairs_exact);

    strat.type1_option = 2;
    strat.budget = 5;
    const int trials = 20000;
    auto swap = run_trials(strat, cfg, trials, 22, 0);
    // Substituted responses face the fidelity ceiling, and Eve gains nothing.
    double p0 = reference_fidelity_bound();
    double expected = std::pow(p0, 5);
    double rate = static_cast<double>(swap.undetected) / trials;
    CHECK(std::abs(rate - expected) < 4 * sigma_of(expected, trials));
    CHECK(swap.pairs_with_alice_max == 0);
    CHECK(swap.pairs_with_bob_max == 0);
}

TEST_CASE("type I option 3: undetected rate p0^L, L pairs per clean round") {
    RoundConfig cfg;
    cfg.challenge_pairs = 100;
    cfg.tested_pairs = 10;

    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::TypeI;
    strat.type1_option = 3;
    strat.budget = 5;

    const int trials = 20000;
    auto mc = run_trials(strat, cfg, trials, 23, 5);
    double p0 = reference_fidelity_bound();
    double expected = std::pow(p0, 5);
    double rate = static_cast<double>(mc.undetected) / trials;
    CHECK(std::abs(rate - expected) < 4 * sigma_of(expected, trials));
    CHECK(mc.pairs_exact);
    CHECK(mc.pairs_with_bob_max == 5);
}

TEST_CASE("type I option 3 respects the prover's request budget") {
    // Thefts replace withheld requests one for one; Alice never sees more
    // than K' requests, so no flood abort can occur.
    RoundConfig cfg;
    cfg.challenge_pairs = 40;
    cfg.tested_pairs = 6;

    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::TypeI;
    strat.type1_option = 3;
    strat.budget = 6;

    for (int t = 0; t < 200; ++t) {
        cfg.seed = derive_seed(77, static_cast<std::uint64_t>(t));
        Session session(cfg, 1);
        auto eve = make_adversary(strat);
        auto r = session.run_round(*eve);
        if (!r.success) {
            CHECK(r.abort_reason == AbortReason::TestFailure);
        }
    }
}

TEST_CASE("type II case 2: detection p0^(L K'/K), bounded key fraction") {
    RoundConfig cfg;
    cfg.challenge_pairs = 100;
    cfg.tested_pairs = 10;

    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::TypeII;
    strat.type2_case = 2;
    strat.budget = 50;

    const int trials = 20000;
    MonteCarlo mc;
    int max_pairs = 0;
    for (int t = 0; t < trials; ++t) {
        cfg.seed = derive_seed(31, static_cast<std::uint64_t>(t));
        Session session(cfg, 1);
        auto eve = make_adversary(strat);
        auto r = session.run_round(*eve);
        if (eve->ledger().detected) {
            ++mc.detected;
            continue;
        }
        ++mc.undetected;
        REQUIRE(r.success);
        int pairs = eve->ledger().pairs_with_bob;
        CHECK(eve->ledger().pairs_with_alice == pairs);
        CHECK(pairs <= 50);
        CHECK(session.eve_linked_pairs(Party::Bob) == pairs);
        max_pairs = std::max(max_pairs, pairs);
    }
    double p0 = reference_fidelity_bound();
    double expected = std::pow(p0, 50.0 * 10 / 100);  // p0^(L K'/K)
    double rate = static_cast<double>(mc.undetected) / trials;
    CHECK(std::abs(rate - expected) < 4 * sigma_of(expected, trials) + 1e-3);
    CHECK(max_pairs >= 40);  // most of the budget usually survives
}

TEST_CASE("type II case 1: attacking only untested pairs is free but capped") {
    RoundConfig cfg;
    cfg.challenge_pairs = 100;
    cfg.tested_pairs = 10;

    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::TypeII;
    strat.type2_case = 1;
    strat.budget = 50;

    auto mc = run_trials(strat, cfg, 500, 33, 50);
    CHECK(mc.detected == 0);
    CHECK(mc.pairs_exact);
    CHECK(mc.pairs_with_bob_max == 50);

    // but the budget can never exceed the untested challenges in one round
    strat.budget = 1000;
    auto capped = run_trials(strat, cfg, 100, 34);
    CHECK(capped.detected == 0);
    CHECK(capped.pairs_with_bob_max == 100 - 10);  // K - K' odd pairs survive
}

TEST_CASE("type II case 3 matches case 2 statistically") {
    RoundConfig cfg;
    cfg.challenge_pairs = 100;
    cfg.tested_pairs = 10;

    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::TypeII;
    strat.type2_case = 3;
    strat.budget = 50;

    const int trials = 20000;
    auto mc = run_trials(strat, cfg, trials, 35);
    double p0 = reference_fidelity_bound();
    double expected = std::pow(p0, 5.0);
    double rate = static_cast<double>(mc.undetected) / trials;
    CHECK(std::abs(rate - expected) < 4 * sigma_of(expected, trials) + 1e-3);
}

TEST_CASE("detection invalidates the pairs Eve had accumulated") {
    RoundConfig cfg;
    cfg.challenge_pairs = 100;
    cfg.tested_pairs = 10;

    AttackStrategy strat;
    strat.kind = AttackStrategy::Kind::TypeII;
    strat.type2_case = 2;
    strat.budget = 50;

    // Run rounds with one adversary until a detection happens.
    bool saw_detection = false;
    for (int t = 0; t < 400 && !saw_detection; ++t) {
        cfg.seed = derive_seed(41, static_cast<std::uint64_t>(t));
        Session session(cfg, 4);
        auto eve = make_adversary(strat);
        for (int round = 0; round < 3 && session.alive(); ++round) {
            session.run_round(*eve);
            if (eve->ledger().detected) {
                saw_detection = true;
                CHECK(eve->ledger().pairs_with_bob == 0);
                CHECK(eve->ledger().invalidated_pairs >= 0);
                break;
            }
        }
    }
    CHECK(saw_detection);
}

TEST_CASE("make_adversary covers every strategy kind") {
    for (auto kind : {AttackStrategy::Kind::Passive,
                      AttackStrategy::Kind::Impersonation,
                      AttackStrategy::Kind::DenialOfService,
                      AttackStrategy::Kind::TypeI, AttackStrategy::Kind::TypeII}) {
        AttackStrategy strat;
        strat.kind = kind;
        strat.budget = 1;
        auto eve = make_adversary(strat);
        REQUIRE(eve != nullptr);
        CHECK((kind == AttackStrategy::Kind::Impersonation) ==
              eve->impersonates(Party::Alice));
    }
}
