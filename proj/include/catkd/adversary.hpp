// Eve: channel interposition plus the attack strategies analyzed for the
// protocol, with a ledger of catalyst pairs she shares with each party.

#pragma once

#include <memory>
#include <set>
#include <vector>

#include "catkd/protocol.hpp"

namespace catkd {

struct EveLedger {
    int pairs_with_alice = 0;
    int pairs_with_bob = 0;
    bool detected = false;
    int invalidated_pairs = 0;

    // A failed test makes every pair shared with the detecting verifier
    // worthless.
    void invalidate(Party detecting_verifier);
};

struct AttackStrategy {
    enum class Kind { Passive, Impersonation, DenialOfService, TypeI, TypeII };
    enum class DosMode { CorruptResponse, DropMessages, RequestFlood };

    Kind kind = Kind::Passive;
    Party impersonated = Party::Alice;
    int type1_option = 3;  // 1 | 2 | 3
    int type2_case = 2;    // 1 | 2 | 3
    int budget = 0;        // L: pairs attacked per round (<= K)
    DosMode dos_mode = DosMode::CorruptResponse;
};

// Channel-level adversary. The session routes every message through
// interpose(); the returned messages are what actually gets delivered.
// The default implementation is a transparent channel (Eve absent).
class Adversary {
public:
    virtual ~Adversary() = default;

    virtual std::vector<WireMessage> interpose(Session& session,
                                               WireMessage message) {
        (void)session;
        return {std::move(message)};
    }

    // True if Eve plays the given party wholesale (that party is absent).
    virtual bool impersonates(Party party) const {
        (void)party;
        return false;
    }

    virtual void on_round_begin(Session& session) { (void)session; }
    // Called on a successful round before key merge; strategies credit the
    // ledger for pairs that survived untested.
    virtual void on_round_success(Session& session) { (void)session; }

    EveLedger& ledger() { return ledger_; }
    const EveLedger& ledger() const { return ledger_; }

protected:
    EveLedger ledger_;
};

using PassiveAdversary = Adversary;

// Eve answers Bob's challenges in Alice's absence; lacking the catalyst, each
// of her responses passes a test with probability at most p0.
class ImpersonationAdversary : public Adversary {
public:
    explicit ImpersonationAdversary(Party target = Party::Alice)
        : target_(target) {}

    bool impersonates(Party party) const override { return party == target_; }
    std::vector<WireMessage> interpose(Session& session,
                                       WireMessage message) override;
    void on_round_success(Session& session) override;

private:
    Party target_;
};

// Forces the round to fail so the parties discard their key set.
class DenialOfServiceAdversary : public Adversary {
public:
    explicit DenialOfServiceAdversary(
        AttackStrategy::DosMode mode = AttackStrategy::DosMode::CorruptResponse)
        : mode_(mode) {}

    std::vector<WireMessage> interpose(Session& session,
                                       WireMessage message) override;

private:
    AttackStrategy::DosMode mode_;
    bool flooded_ = false;
    int corrupted_ = 0;
};

// Type I: Eve leaves challenges in transit alone. Option 3 is the material
// one: she withholds one of Bob's requests, answers with her own pair half,
// and spends Alice's request budget to steal a response particle, gaining a
// catalyst pair with Bob at a 1 - p0 detection exposure per theft.
class TypeIAdversary : public Adversary {
public:
    TypeIAdversary(int option, int budget) : option_(option), budget_(budget) {}

    std::vector<WireMessage> interpose(Session& session,
                                       WireMessage message) override;
    void on_round_begin(Session& session) override;

private:
    int option_;
    int budget_;
    int used_ = 0;
    std::set<int> pending_steals_;
    std::set<int> substituted_responses_;
};

// Type II: Eve intercepts up to L transit challenges, keeping the genuine
// half and forwarding one of her own. Untested attacked pairs become key
// pairs she shares with both parties; tested ones expose her at 1 - p0 each.
class TypeIIAdversary : public Adversary {
public:
    TypeIIAdversary(int variant, int budget)
        : variant_(variant), budget_(budget) {}

    std::vector<WireMessage> interpose(Session& session,
                                       WireMessage message) override;
    void on_round_begin(Session& session) override;
    void on_round_success(Session& session) override;

private:
    int variant_;  // 1: attack only pairs that will go untested; 2 | 3
    int budget_;
    int attacked_count_ = 0;
    std::set<int> attacked_;
};

std::unique_ptr<Adversary> make_adversary(const AttackStrategy& strategy);

}  // namespace catkd
