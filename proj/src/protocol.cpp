#include "catkd/protocol.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "catkd/adversary.hpp"
#include "catkd/rng.hpp"
#include "catkd/state.hpp"

namespace catkd {

const char* to_string(Party p) {
    switch (p) {
        case Party::Alice: return "Alice";
        case Party::Bob: return "Bob";
        case Party::Eve: return "Eve";
    }
    return "?";
}

const char* to_string(WireMessage::Kind k) {
    switch (k) {
        case WireMessage::Kind::Challenge: return "Challenge";
        case WireMessage::Kind::CatalysisClassical: return "CatalysisClassical";
        case WireMessage::Kind::ResponseRequest: return "ResponseRequest";
        case WireMessage::Kind::Response: return "Response";
        case WireMessage::Kind::Abort: return "Abort";
    }
    return "?";
}

const char* to_string(AbortReason r) {
    switch (r) {
        case AbortReason::None: return "none";
        case AbortReason::TestFailure: return "test-failure";
        case AbortReason::RequestFlood: return "request-flood";
        case AbortReason::MissingParticle: return "missing-particle";
        case AbortReason::Timeout: return "timeout";
    }
    return "?";
}

std::string transcript_line(const WireMessage& m) {
    std::ostringstream out;
    out << m.round << ',' << m.step << ',' << to_string(m.sender) << ','
        << to_string(m.kind) << ',' << m.index;
    return out.str();
}

void RoundConfig::validate() const {
    if (challenge_pairs < 1)
        throw std::invalid_argument("RoundConfig: K must be positive");
    int min_tested = allow_zero_tests ? 0 : 1;
    if (tested_pairs < min_tested)
        throw std::invalid_argument("RoundConfig: K' must be positive");
    if (2 * tested_pairs >= challenge_pairs)
        throw std::invalid_argument("RoundConfig: K' must be < K/2");
}

namespace {

// Portable in-place Fisher-Yates; std::shuffle is not pinned by the standard.
template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng() % i]);
}

Party verifier_of(int index) { return index % 2 == 1 ? Party::Bob : Party::Alice; }
Party prover_of(int index) { return index % 2 == 1 ? Party::Alice : Party::Bob; }

}  // namespace

Session::Session(const RoundConfig& config, int initial_key_sets)
    : config_(config), p0_(reference_fidelity_bound()) {
    config_.validate();
    if (initial_key_sets < 1)
        throw std::invalid_argument("Session: need at least one key set");
    active_key_.assign(2 * config_.challenge_pairs, KeyPairRecord{});
    reserve_sets_ = initial_key_sets - 1;
}

const ChallengeRecord& Session::challenge(int index) const {
    if (index < 1 || index > static_cast<int>(challenges_.size()))
        throw std::out_of_range("Session::challenge: bad index");
    return challenges_[index - 1];
}

int Session::eve_linked_pairs(Party with) const {
    int n = 0;
    for (const auto& slot : active_key_) {
        if (with == Party::Alice && slot.alice_link == PeerLink::Eve) ++n;
        if (with == Party::Bob && slot.bob_link == PeerLink::Eve) ++n;
    }
    return n;
}

void Session::record(const WireMessage& message) {
    transcript_.push_back(message);
}

void Session::write_transcript(std::ostream& out) const {
    for (const auto& m : transcript_) out << transcript_line(m) << '\n';
}

void Session::deliver(const WireMessage& message, Adversary& adversary) {
    if (aborted_) return;
    record(message);
    auto delivered = adversary.interpose(*this, message);
    for (auto& m : delivered) {
        m.round = round_;
        m.step = step_;
        bool altered = m.kind != message.kind || m.index != message.index ||
                       m.sender != message.sender ||
                       m.substituted != message.substituted;
        if (altered) record(m);
        handle(m, adversary);
        if (aborted_) break;
    }
}

void Session::handle(const WireMessage& message, Adversary& adversary) {
    if (aborted_) return;
    switch (message.kind) {
        case WireMessage::Kind::Challenge: {
            auto& rec = challenges_[message.index - 1];
            rec.arrived = true;
            if (message.substituted) {
                rec.substituted = true;
                rec.intercepted = true;
            }
            break;
        }
        case WireMessage::Kind::CatalysisClassical:
            break;  // content is modeled at the outcome level
        case WireMessage::Kind::ResponseRequest: {
            auto& rec = challenges_[message.index - 1];
            Party prover = prover_of(message.index);
            int& count = prover == Party::Alice ? requests_to_alice_
                                                : requests_to_bob_;
            ++count;
            if (count > config_.tested_pairs) {
                abort_round(AbortReason::RequestFlood, prover, adversary);
                return;
            }
            if (rec.responded || rec.discarded || (!rec.arrived && !rec.substituted)) {
                abort_round(AbortReason::MissingParticle, prover, adversary);
                return;
            }
            rec.responded = true;
            WireMessage response{WireMessage::Kind::Response, prover,
                                 verifier_of(message.index), message.index,
                                 round_, step_};
            deliver(response, adversary);
            break;
        }
        case WireMessage::Kind::Response:
            run_test(message, adversary);
            break;
        case WireMessage::Kind::Abort:
            break;
    }
}

void Session::run_test(const WireMessage& response, Adversary& adversary) {
    // Unsolicited responses are dropped; a verifier only measures pairs it
    // asked for.
    if (!pending_test_[response.index - 1]) return;
    pending_test_[response.index - 1] = false;

    auto& rec = challenges_[response.index - 1];
    double pass_prob = response.carried_fidelity >= 0.0
                           ? response.carried_fidelity
                           : rec.fidelity_c;
    pass_prob = std::clamp(pass_prob, 0.0, 1.0);
    ++tests_run_;
    rec.tested = true;
    rec.discarded = true;  // the measurement consumes the pair
    if (!sample_projective_test(pass_prob, physics_rng_))
        abort_round(AbortReason::TestFailure, verifier_of(response.index),
                    adversary);
}

void Session::abort_round(AbortReason reason, Party detecting_verifier,
                          Adversary& adversary) {
    aborted_ = true;
    abort_reason_ = reason;
    detecting_verifier_ = detecting_verifier;
    record(WireMessage{WireMessage::Kind::Abort, detecting_verifier,
                       detecting_verifier == Party::Alice ? Party::Bob
                                                          : Party::Alice,
                       0, round_, step_});
    if (reason == AbortReason::TestFailure ||
        reason == AbortReason::RequestFlood) {
        adversary.ledger().detected = true;
        adversary.ledger().invalidate(detecting_verifier);
    }
}

std::vector<WireMessage> Session::prepare_challenges(Adversary& adversary) {
    step_ = 1;
    std::vector<WireMessage> sent;
    const int total = 2 * config_.challenge_pairs;
    const double b_fidelity = fidelity_of_b_with_c();
    for (int i = 1; i <= total; ++i) {
        auto& rec = challenges_[i - 1];
        rec.index = i;
        rec.fidelity_c = b_fidelity;  // state |b> until catalysis
        Party verifier = verifier_of(i);
        if (adversary.impersonates(verifier)) {
            // Eve plays the verifier: she prepares the pair herself.
            WireMessage msg{WireMessage::Kind::Challenge, Party::Eve,
                            prover_of(i), i, round_, step_};
            msg.substituted = true;
            sent.push_back(msg);
            deliver(msg, adversary);
            continue;
        }
        WireMessage msg{WireMessage::Kind::Challenge, verifier, prover_of(i),
                        i, round_, step_};
        sent.push_back(msg);
        deliver(msg, adversary);
    }
    // A challenge that never reached the prover sits with Eve.
    for (auto& rec : challenges_)
        if (!rec.arrived) rec.intercepted = true;
    return sent;
}

double Session::fidelity_of_b_with_c() {
    static const double f = [] {
        auto [b, c] = reference_states();
        double s = 0.0;
        for (Eigen::Index k = 0; k < b.dim(); ++k)
            s += std::sqrt(b[k] * c[k]);
        return s * s;
    }();
    return f;
}

void Session::perform_catalysis_all(Adversary& adversary) {
    step_ = 2;
    const int total = 2 * config_.challenge_pairs;
    for (int i = 1; i <= total && !aborted_; ++i) perform_catalysis(i, adversary);
}

void Session::perform_catalysis(int index, Adversary& adversary) {
    auto& rec = challenges_[index - 1];
    const KeyPairRecord& slot = active_key_[index - 1];
    bool genuine_catalyst = slot.genuine();
    bool pair_intact = !rec.intercepted && !rec.substituted;
    // A genuine catalyst makes the conversion exact; anything else caps the
    // reachable fidelity at p0 (the adversary is granted the optimum).
    rec.fidelity_c = (genuine_catalyst && pair_intact) ? 1.0 : p0_;
    rec.converted = true;
    Party verifier = verifier_of(index);
    if (!adversary.impersonates(verifier)) {
        WireMessage msg{WireMessage::Kind::CatalysisClassical, verifier,
                        prover_of(index), index, round_, step_};
        deliver(msg, adversary);
    }
}

std::pair<std::vector<int>, std::vector<int>> Session::select_test_sets() {
    if (!q_alice_.empty() || !q_bob_.empty()) return {q_alice_, q_bob_};
    const int k = config_.challenge_pairs;
    const int kp = config_.tested_pairs;
    std::vector<int> odds, evens;
    for (int i = 1; i <= 2 * k; i += 2) odds.push_back(i);
    for (int i = 2; i <= 2 * k; i += 2) evens.push_back(i);
    shuffle_vec(evens, shared_rng_);
    shuffle_vec(odds, shared_rng_);
    q_alice_.assign(evens.begin(), evens.begin() + kp);
    q_bob_.assign(odds.begin(), odds.begin() + kp);
    return {q_alice_, q_bob_};
}

RoundResult Session::exchange_tests(const std::vector<int>& q_alice,
                                    const std::vector<int>& q_bob,
                                    Adversary& adversary) {
    step_ = 3;
    const int kp = config_.tested_pairs;
    // Bob requests first; the two verifiers then strictly alternate.
    for (int t = 0; t < kp && !aborted_; ++t) {
        for (Party verifier : {Party::Bob, Party::Alice}) {
            if (aborted_) break;
            const auto& q = verifier == Party::Bob ? q_bob : q_alice;
            int index = q[t];
            if (adversary.impersonates(verifier)) continue;  // Eve skips tests
            pending_test_[index - 1] = true;
            WireMessage request{WireMessage::Kind::ResponseRequest, verifier,
                                prover_of(index), index, round_, step_};
            deliver(request, adversary);
            if (!aborted_ && !challenges_[index - 1].tested)
                abort_round(AbortReason::Timeout, verifier, adversary);
        }
    }
    step_ = 4;
    RoundResult result;
    result.success = !aborted_;
    result.abort_reason = abort_reason_;
    result.detecting_verifier = detecting_verifier_;
    result.at_test = aborted_ ? tests_run_ : -1;
    return result;
}

RoundResult Session::finalize_round(RoundResult result, Adversary& adversary) {
    step_ = 5;
    const int k = config_.challenge_pairs;
    int old_size = active_key_size();
    if (!result.success) {
        // Whole key set is worthless; fall back to a reserve if any.
        active_key_.clear();
        if (reserve_sets_ > 0) {
            --reserve_sets_;
            active_key_.assign(2 * k, KeyPairRecord{});
        } else {
            dead_ = true;
        }
        result.key_delta = 0;
        return result;
    }

    adversary.on_round_success(*this);

    std::vector<KeyPairRecord> merged;
    merged.reserve(active_key_.size() + 2 * k);
    // Catalysts for tested indices are destroyed; the rest survive as is.
    std::vector<bool> tested_index(2 * k + 1, false);
    for (int i : q_alice_) tested_index[i] = true;
    for (int i : q_bob_) tested_index[i] = true;
    for (int i = 1; i <= 2 * k; ++i)
        if (!tested_index[i]) merged.push_back(active_key_[i - 1]);
    for (std::size_t i = 2 * k; i < active_key_.size(); ++i)
        merged.push_back(active_key_[i]);

    // Surviving converted challenge pairs join the key.
    for (const auto& rec : challenges_) {
        if (rec.tested || rec.discarded) continue;
        KeyPairRecord slot;
        Party prover = prover_of(rec.index);
        PeerLink& prover_link =
            prover == Party::Alice ? slot.alice_link : slot.bob_link;
        PeerLink& verifier_link =
            prover == Party::Alice ? slot.bob_link : slot.alice_link;
        if (rec.responded) {
            // The prover's half went out and Eve kept it.
            prover_link = PeerLink::None;
            verifier_link = PeerLink::Eve;
        } else if (rec.intercepted) {
            verifier_link = PeerLink::Eve;
            prover_link = rec.substituted ? PeerLink::Eve : PeerLink::None;
        }
        merged.push_back(slot);
    }

    auto relabel_rng = make_rng(config_.seed, static_cast<std::uint64_t>(round_), 3);
    shuffle_vec(merged, relabel_rng);
    active_key_ = std::move(merged);

    result.key_delta = active_key_size() - old_size;
    ++rounds_completed_;
    return result;
}

RoundResult Session::run_round(Adversary& adversary) {
    if (dead_) throw std::logic_error("Session::run_round: session terminated");
    const int k = config_.challenge_pairs;
    ++round_;
    challenges_.assign(2 * k, ChallengeRecord{});
    pending_test_.assign(2 * k, false);
    q_alice_.clear();
    q_bob_.clear();
    requests_to_alice_ = requests_to_bob_ = 0;
    tests_run_ = 0;
    aborted_ = false;
    abort_reason_ = AbortReason::None;
    detecting_verifier_ = Party::Eve;
    shared_rng_ = make_rng(config_.seed, static_cast<std::uint64_t>(round_), 1);
    physics_rng_ = make_rng(config_.seed, static_cast<std::uint64_t>(round_), 2);

    // The test sets are a deterministic function of the shared stream; draw
    // them up front so adversary-optimal strategies may consult them.
    select_test_sets();

    adversary.on_round_begin(*this);
    prepare_challenges(adversary);
    if (!aborted_) perform_catalysis_all(adversary);
    RoundResult result;
    if (!aborted_) {
        result = exchange_tests(q_alice_, q_bob_, adversary);
    } else {
        result.success = false;
        result.abort_reason = abort_reason_;
        result.detecting_verifier = detecting_verifier_;
        result.at_test = tests_run_;
    }
    return finalize_round(result, adversary);
}

}  // namespace catkd
