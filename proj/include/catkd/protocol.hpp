// Authentication-round engine: catalyst key store, challenge bookkeeping,
// message channel with adversary interposition, abort rules and key growth.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "catkd/schmidt.hpp"

namespace catkd {

class Adversary;

enum class Party { Alice, Bob, Eve };
const char* to_string(Party p);

struct RoundConfig {
    int challenge_pairs = 10;  // K: challenge pairs per party per round
    int tested_pairs = 2;      // K': responses each verifier requests
    std::uint64_t seed = 0;    // shared pseudo-random seed
    bool allow_zero_tests = false;  // test-mode: permit K' == 0

    void validate() const;  // throws std::invalid_argument unless K' < K/2
};

struct WireMessage {
    enum class Kind { Challenge, CatalysisClassical, ResponseRequest, Response, Abort };

    Kind kind = Kind::Challenge;
    Party sender = Party::Alice;
    Party receiver = Party::Bob;
    int index = 0;  // pair index in 1..2K (0 for Abort)
    int round = 0;
    int step = 0;
    // Set by the adversary on particles she forwards from her own supply.
    bool substituted = false;
    // Fidelity with c carried by a substituted particle; < 0 means "use the
    // session's record for this index".
    double carried_fidelity = -1.0;
};
const char* to_string(WireMessage::Kind k);

// One line per message: round,step,sender,variant,index.
std::string transcript_line(const WireMessage& m);

// Who the particle held by a party is actually entangled with.
enum class PeerLink { Legitimate, Eve, None };

struct KeyPairRecord {
    PeerLink alice_link = PeerLink::Legitimate;
    PeerLink bob_link = PeerLink::Legitimate;

    bool genuine() const {
        return alice_link == PeerLink::Legitimate &&
               bob_link == PeerLink::Legitimate;
    }
};

enum class AbortReason { None, TestFailure, RequestFlood, MissingParticle, Timeout };
const char* to_string(AbortReason r);

struct RoundResult {
    bool success = false;
    AbortReason abort_reason = AbortReason::None;
    Party detecting_verifier = Party::Eve;  // meaningful on abort
    int at_test = -1;   // how many tests had run when the round aborted
    int key_delta = 0;  // 2K - 4K' on success, else 0 (set is discarded)
};

// State of one challenge pair during a round.
struct ChallengeRecord {
    int index = 0;           // odd: Bob verifier, even: Alice verifier
    double fidelity_c = 0.0; // fidelity of the pair with c
    bool converted = false;
    bool arrived = false;      // prover received a challenge particle
    bool intercepted = false;  // Eve holds the genuine prover half
    bool substituted = false;  // prover's half came from Eve's supply
    bool tested = false;
    bool responded = false;  // prover sent the half away
    bool discarded = false;
};

// A session owns both legitimate parties' catalyst inventories and drives
// authentication rounds; all randomness derives from the config seed, so a
// session replays bit-identically.
class Session {
public:
    Session(const RoundConfig& config, int initial_key_sets);

    // Runs steps 1-5 against the given adversary.
    RoundResult run_round(Adversary& adversary);

    // --- step operations, exposed for targeted tests ---
    std::vector<WireMessage> prepare_challenges(Adversary& adversary);
    void perform_catalysis(int index, Adversary& adversary);
    void perform_catalysis_all(Adversary& adversary);
    // (Q_A, Q_B): even resp. odd pair indices, K' each, from the shared stream.
    std::pair<std::vector<int>, std::vector<int>> select_test_sets();
    RoundResult exchange_tests(const std::vector<int>& q_alice,
                               const std::vector<int>& q_bob,
                               Adversary& adversary);
    RoundResult finalize_round(RoundResult result, Adversary& adversary);

    const RoundConfig& config() const { return config_; }
    int active_key_size() const { return static_cast<int>(active_key_.size()); }
    int reserve_sets() const { return static_cast<int>(reserve_sets_); }
    bool alive() const { return !dead_; }
    int rounds_completed() const { return rounds_completed_; }
    int current_round() const { return round_; }
    double fidelity_ceiling() const { return p0_; }

    const std::vector<ChallengeRecord>& challenges() const { return challenges_; }
    const ChallengeRecord& challenge(int index) const;
    // Key pairs the adversary is entangled into, in the active set.
    int eve_linked_pairs(Party with) const;

    const std::vector<WireMessage>& transcript() const { return transcript_; }
    void write_transcript(std::ostream& out) const;

    // Test sets of the round in progress (empty before selection). Strategies
    // in the adversary-optimal model may consult these.
    const std::vector<int>& bob_test_set() const { return q_bob_; }
    const std::vector<int>& alice_test_set() const { return q_alice_; }

private:
    friend class Adversary;

    static double fidelity_of_b_with_c();
    void deliver(const WireMessage& message, Adversary& adversary);
    void handle(const WireMessage& message, Adversary& adversary);
    void run_test(const WireMessage& response, Adversary& adversary);
    void abort_round(AbortReason reason, Party detecting_verifier,
                     Adversary& adversary);
    void record(const WireMessage& message);

    RoundConfig config_;
    double p0_;  // fidelity ceiling for uncatalyzed conversions

    std::vector<KeyPairRecord> active_key_;
    int reserve_sets_ = 0;
    bool dead_ = false;

    // per-round state
    int round_ = 0;
    int rounds_completed_ = 0;
    std::vector<ChallengeRecord> challenges_;
    std::vector<int> q_alice_, q_bob_;
    std::vector<bool> pending_test_;  // verifier sent a request, test due
    int requests_to_alice_ = 0, requests_to_bob_ = 0;
    int tests_run_ = 0;
    bool aborted_ = false;
    AbortReason abort_reason_ = AbortReason::None;
    Party detecting_verifier_ = Party::Eve;
    int step_ = 0;

    std::mt19937_64 shared_rng_;   // both parties' coordinated randomness
    std::mt19937_64 physics_rng_;  // measurement outcomes

    std::vector<WireMessage> transcript_;
};

}  // namespace catkd
