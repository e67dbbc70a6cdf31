#include "catkd/adversary.hpp"

#include <algorithm>

namespace catkd {

void EveLedger::invalidate(Party detecting_verifier) {
    if (detecting_verifier == Party::Alice) {
        invalidated_pairs += pairs_with_alice;
        pairs_with_alice = 0;
    } else if (detecting_verifier == Party::Bob) {
        invalidated_pairs += pairs_with_bob;
        pairs_with_bob = 0;
    }
}

namespace {

WireMessage eve_response(const Session& session, int index, Party receiver) {
    WireMessage m{WireMessage::Kind::Response, Party::Eve, receiver, index,
                  session.current_round(), 3};
    m.substituted = true;
    // Best state reachable without entanglement assistance.
    m.carried_fidelity = session.fidelity_ceiling();
    return m;
}

}  // namespace

std::vector<WireMessage> ImpersonationAdversary::interpose(Session& session,
                                                           WireMessage message) {
    if (message.receiver != target_) return {std::move(message)};
    // Everything sent to the absent party ends up with Eve; requests get her
    // best uncatalyzed response.
    if (message.kind == WireMessage::Kind::ResponseRequest)
        return {eve_response(session, message.index,
                             message.sender == Party::Eve ? Party::Bob
                                                          : message.sender)};
    return {};
}

void ImpersonationAdversary::on_round_success(Session& session) {
    // Every surviving pair of the round is one Eve shares with the real
    // party, since she held the absent one's end throughout.
    Party real = target_ == Party::Alice ? Party::Bob : Party::Alice;
    int& credit = real == Party::Bob ? ledger_.pairs_with_bob
                                     : ledger_.pairs_with_alice;
    for (const auto& rec : session.challenges()) {
        if (rec.tested || rec.discarded) continue;
        if (rec.intercepted || rec.substituted) ++credit;
    }
}

std::vector<WireMessage> DenialOfServiceAdversary::interpose(
    Session& session, WireMessage message) {
    switch (mode_) {
        case AttackStrategy::DosMode::DropMessages:
            return {};
        case AttackStrategy::DosMode::CorruptResponse:
            if (message.kind == WireMessage::Kind::Response) {
                message.substituted = true;
                message.carried_fidelity = 0.0;  // deliberately ruined pair
                ++corrupted_;
            }
            return {std::move(message)};
        case AttackStrategy::DosMode::RequestFlood: {
            if (flooded_ || message.kind != WireMessage::Kind::ResponseRequest)
                return {std::move(message)};
            flooded_ = true;
            std::vector<WireMessage> out;
            int kp = session.config().tested_pairs;
            // K' + 1 distinct requests exhaust Alice's response budget.
            for (int i = 1, sent = 0; sent < kp + 1; i += 2) {
                if (i == message.index) continue;
                WireMessage req{WireMessage::Kind::ResponseRequest, Party::Eve,
                                Party::Alice, i, session.current_round(), 3};
                out.push_back(req);
                ++sent;
            }
            out.push_back(std::move(message));
            return out;
        }
    }
    return {std::move(message)};
}

void TypeIAdversary::on_round_begin(Session& session) {
    (void)session;
    used_ = 0;
    pending_steals_.clear();
}

std::vector<WireMessage> TypeIAdversary::interpose(Session& session,
                                                   WireMessage message) {
    if (option_ == 1) return {std::move(message)};  // pure relay

    if (option_ == 2) {
        // Substitute Alice's response with Eve's own particle: exposure
        // without gain.
        if (message.kind == WireMessage::Kind::Response &&
            message.receiver == Party::Bob && message.sender == Party::Alice &&
            used_ < budget_) {
            ++used_;
            return {eve_response(session, message.index, Party::Bob)};
        }
        return {std::move(message)};
    }

    // Option 3.
    if (message.kind == WireMessage::Kind::ResponseRequest &&
        message.receiver == Party::Alice && message.sender == Party::Bob &&
        used_ < budget_) {
        const auto& q_bob = session.bob_test_set();
        int steal = 0;
        for (int j = 1; j <= 2 * session.config().challenge_pairs; j += 2) {
            if (j == message.index || pending_steals_.count(j)) continue;
            if (std::find(q_bob.begin(), q_bob.end(), j) != q_bob.end())
                continue;
            const auto& rec = session.challenge(j);
            if (!rec.converted || rec.tested || rec.responded ||
                rec.intercepted)
                continue;
            steal = j;
            break;
        }
        if (steal == 0) return {std::move(message)};
        ++used_;
        pending_steals_.insert(steal);
        // Answer Bob ourselves, then spend Alice's budget on the theft.
        std::vector<WireMessage> out;
        out.push_back(eve_response(session, message.index, Party::Bob));
        WireMessage req{WireMessage::Kind::ResponseRequest, Party::Eve,
                        Party::Alice, steal, session.current_round(), 3};
        out.push_back(req);
        return out;
    }

    if (message.kind == WireMessage::Kind::Response &&
        message.sender == Party::Alice && pending_steals_.count(message.index)) {
        // Alice's half arrives; Eve keeps it. She now holds a perfect
        // catalyst pair with Bob, and the withheld pair with Alice is
        // credited at catalyst grade.
        pending_steals_.erase(message.index);
        ++ledger_.pairs_with_bob;
        ++ledger_.pairs_with_alice;
        return {};
    }

    return {std::move(message)};
}

void TypeIIAdversary::on_round_begin(Session& session) {
    (void)session;
    attacked_count_ = 0;
    attacked_.clear();
}

std::vector<WireMessage> TypeIIAdversary::interpose(Session& session,
                                                    WireMessage message) {
    if (message.kind == WireMessage::Kind::Challenge &&
        message.receiver == Party::Alice && message.sender == Party::Bob &&
        attacked_count_ < budget_) {
        const auto& q_bob = session.bob_test_set();
        bool will_be_tested =
            std::find(q_bob.begin(), q_bob.end(), message.index) != q_bob.end();
        if (variant_ == 1 && will_be_tested) return {std::move(message)};
        ++attacked_count_;
        attacked_.insert(message.index);
        message.substituted = true;  // Eve keeps beta, forwards her alpha
        return {std::move(message)};
    }

    if (attacked_.count(message.index) == 0) return {std::move(message)};

    if (message.kind == WireMessage::Kind::ResponseRequest &&
        message.receiver == Party::Alice) {
        if (variant_ == 3) return {std::move(message)};  // forward to Alice
        // Case 2: Eve answers with the intercepted particle.
        return {eve_response(session, message.index, Party::Bob)};
    }

    if (variant_ == 3 && message.kind == WireMessage::Kind::Response &&
        message.sender == Party::Alice && message.receiver == Party::Bob) {
        // Case 3: Eve intercepts Alice's response and forwards her best
        // three-particle conversion; she retains no entanglement.
        return {eve_response(session, message.index, Party::Bob)};
    }

    return {std::move(message)};
}

void TypeIIAdversary::on_round_success(Session& session) {
    // Untested attacked pairs: Eve is assumed to steer both into the
    // catalyst state, one shared with each party.
    for (int i : attacked_) {
        const auto& rec = session.challenge(i);
        if (rec.tested || rec.discarded || rec.responded) continue;
        ++ledger_.pairs_with_alice;
        ++ledger_.pairs_with_bob;
    }
}

std::unique_ptr<Adversary> make_adversary(const AttackStrategy& strategy) {
    switch (strategy.kind) {
        case AttackStrategy::Kind::Passive:
            return std::make_unique<Adversary>();
        case AttackStrategy::Kind::Impersonation:
            return std::make_unique<ImpersonationAdversary>(strategy.impersonated);
        case AttackStrategy::Kind::DenialOfService:
            return std::make_unique<DenialOfServiceAdversary>(strategy.dos_mode);
        case AttackStrategy::Kind::TypeI:
            return std::make_unique<TypeIAdversary>(strategy.type1_option,
                                                    strategy.budget);
        case AttackStrategy::Kind::TypeII:
            return std::make_unique<TypeIIAdversary>(strategy.type2_case,
                                                     strategy.budget);
    }
    return std::make_unique<Adversary>();
}

}  // namespace catkd
