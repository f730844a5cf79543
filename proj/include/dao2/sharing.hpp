// SPDX-License-Identifier: Apache-2.0
//
// Shamir sharing over Z_q, Lagrange reconstruction at zero, and a
// Feldman-verified distributed key generation.

#pragma once

#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "dao2/group.hpp"
#include "dao2/rng.hpp"
#include "dao2/types.hpp"

namespace dao2 {

struct Share {
  PartyIndex index = 0;
  Scalar value;

  friend bool operator==(const Share&, const Share&) = default;
};

// Public view of a t-of-n sharing plus whichever secret shares the holder
// knows: all n for a dealer, exactly one after a DKG.
struct ShareSet {
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  std::vector<Share> shares;
  // public_shares[j - 1] = x_j * G
  std::vector<GroupPoint> public_shares;
  GroupPoint aggregate;

  const GroupPoint& public_share(PartyIndex j) const;
  // The share for party j; throws DomainError if it is not held.
  const Share& share_of(PartyIndex j) const;
};

// λ_{i,S} evaluated at zero. Throws DomainError if i is not in S or S has
// zero or duplicate indices.
Scalar lagrange_coeff(PartyIndex i, std::span<const PartyIndex> set);

// All coefficients for S, in the order of S.
std::vector<Scalar> lagrange_coeffs(std::span<const PartyIndex> set);

// Validates an index set: nonempty, every index >= 1, no duplicates.
void check_index_set(std::span<const PartyIndex> set);

ShareSet share_secret(const Scalar& secret, std::uint32_t n, std::uint32_t t, Rng& rng);

// Σ λ_{i,S} x_i over the given shares; throws DomainError on duplicates.
Scalar reconstruct(std::span<const Share> shares);

// Σ λ_{i,S} P_i; points[k] belongs to party set[k].
GroupPoint reconstruct_in_exponent(std::span<const PartyIndex> set, std::span<const GroupPoint> points);

// Polynomial with coefficients c_0..c_{t-1}, evaluated by Horner's rule.
class Polynomial {
 public:
  explicit Polynomial(std::vector<Scalar> coefficients);
  static Polynomial random(const Scalar& constant, std::uint32_t t, Rng& rng);

  Scalar evaluate(const Scalar& x) const;
  const std::vector<Scalar>& coefficients() const { return coeffs_; }
  std::uint32_t degree() const { return static_cast<std::uint32_t>(coeffs_.size() - 1); }
  void wipe();

 private:
  std::vector<Scalar> coeffs_;
};

// ---------------------------------------------------------------------------
// Feldman DKG

struct FeldmanCommitments {
  PartyIndex dealer = 0;
  // coeff_commits[k] = c_k * G, k = 0..t-1
  std::vector<GroupPoint> coeff_commits;

  // Σ_k j^k C_k, the public image of the share dealt to party j.
  GroupPoint evaluate(PartyIndex j) const;
  // evaluate(1) .. evaluate(n).
  std::vector<GroupPoint> evaluate_range(std::uint32_t n) const;
};

struct DealtShare {
  PartyIndex dealer = 0;
  PartyIndex recipient = 0;
  Scalar value;
};

struct DkgComplaint {
  PartyIndex accuser = 0;
  PartyIndex dealer = 0;
};

// s_ij * G == Σ_k j^k C_k
bool dkg_verify(const DealtShare& share, const FeldmanCommitments& commitments);

// One participant of the DKG. Deals a random polynomial, checks what it
// receives, and combines the contributions of the qualified dealers.
class DkgParty {
 public:
  struct Deal {
    FeldmanCommitments commitments;
    std::vector<DealtShare> shares;  // one per recipient 1..n, including self
  };

  DkgParty(PartyIndex self, std::uint32_t n, std::uint32_t t);

  PartyIndex index() const { return self_; }

  // dkg_round: samples the polynomial and produces the dealt shares.
  Deal deal(Rng& rng);

  // Records the share and commitments from a dealer. Returns a complaint
  // (to be broadcast) when the Feldman check fails.
  std::optional<DkgComplaint> receive(const DealtShare& share, const FeldmanCommitments& commitments);

  // Every dealer's share at once (commitments[k] belongs to shares[k]).
  // Checks the sum against the summed commitments first and falls back to
  // per-dealer checks only if that fails. Complaints come back by dealer.
  std::vector<DkgComplaint> receive_all(std::span<const DealtShare> shares,
                                        std::span<const FeldmanCommitments> commitments);

  // Combines contributions from every dealer not named in `excluded`.
  // The result holds only this party's share.
  ShareSet finalize(const std::set<PartyIndex>& excluded) const;

 private:
  PartyIndex self_;
  std::uint32_t n_;
  std::uint32_t t_;
  std::vector<std::optional<Scalar>> received_;  // by dealer index - 1
  std::vector<std::optional<FeldmanCommitments>> commitments_;
};

struct DkgResult {
  std::vector<ShareSet> parties;  // parties[j - 1] belongs to party j
  std::vector<DkgComplaint> complaints;
  std::set<PartyIndex> excluded_dealers;
  // Commitments from the qualified dealers, in dealer order.
  std::vector<FeldmanCommitments> qualified_commitments;
};

// Test and fault-injection hook: may alter a dealt share in flight.
using DealTamper = std::function<void(DealtShare&)>;

// Runs every party of an n-party DKG in-process. Complaints are broadcast;
// any accused dealer is excluded by everyone.
DkgResult run_dkg(std::uint32_t n, std::uint32_t t, Rng& rng, const DealTamper& tamper = {});

}  // namespace dao2
