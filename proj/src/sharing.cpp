// SPDX-License-Identifier: Apache-2.0

#include "dao2/sharing.hpp"

#include <algorithm>

#include "dao2/errors.hpp"

namespace dao2 {

const GroupPoint& ShareSet::public_share(PartyIndex j) const {
  if (j == 0 || j > public_shares.size()) throw DomainError("party index out of range");
  return public_shares[j - 1];
}

const Share& ShareSet::share_of(PartyIndex j) const {
  for (const auto& s : shares) {
    if (s.index == j) return s;
  }
  throw DomainError("share for party " + std::to_string(j) + " is not held");
}

void check_index_set(std::span<const PartyIndex> set) {
  if (set.empty()) throw DomainError("empty index set");
  std::vector<PartyIndex> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == 0) throw DomainError("index 0 is reserved for the secret");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("duplicate index in set");
  }
}

Scalar lagrange_coeff(PartyIndex i, std::span<const PartyIndex> set) {
  check_index_set(set);
  if (std::find(set.begin(), set.end(), i) == set.end()) {
    throw DomainError("index " + std::to_string(i) + " is not in the set");
  }
  Scalar num = Scalar::one();
  Scalar den = Scalar::one();
  const Scalar xi = Scalar::from_u64(i);
  for (PartyIndex j : set) {
    if (j == i) continue;
    const Scalar xj = Scalar::from_u64(j);
    num *= xj;
    den *= xj - xi;
  }
  return num * den.inverse();
}

std::vector<Scalar> lagrange_coeffs(std::span<const PartyIndex> set) {
  check_index_set(set);
  const std::size_t m = set.size();
  std::vector<Scalar> num(m, Scalar::one());
  std::vector<Scalar> den(m, Scalar::one());
  for (std::size_t a = 0; a < m; ++a) {
    const Scalar xi = Scalar::from_u64(set[a]);
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      const Scalar xj = Scalar::from_u64(set[b]);
      num[a] *= xj;
      den[a] *= xj - xi;
    }
  }
  // Batch inversion: one field inverse for all denominators.
  std::vector<Scalar> prefix(m);
  Scalar acc = Scalar::one();
  for (std::size_t a = 0; a < m; ++a) {
    prefix[a] = acc;
    acc *= den[a];
  }
  Scalar inv = acc.inverse();
  std::vector<Scalar> out(m);
  for (std::size_t a = m; a-- > 0;) {
    out[a] = num[a] * inv * prefix[a];
    inv *= den[a];
  }
  return out;
}

Polynomial::Polynomial(std::vector<Scalar> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.empty()) throw DomainError("polynomial needs at least one coefficient");
}

Polynomial Polynomial::random(const Scalar& constant, std::uint32_t t, Rng& rng) {
  if (t == 0) throw DomainError("threshold must be at least 1");
  std::vector<Scalar> c;
  c.reserve(t);
  c.push_back(constant);
  for (std::uint32_t k = 1; k < t; ++k) c.push_back(random_scalar(rng));
  return Polynomial(std::move(c));
}

Scalar Polynomial::evaluate(const Scalar& x) const {
  Scalar acc;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void Polynomial::wipe() {
  for (auto& c : coeffs_) c.wipe();
}

ShareSet share_secret(const Scalar& secret, std::uint32_t n, std::uint32_t t, Rng& rng) {
  if (t == 0 || t > n) throw DomainError("share_secret requires 1 <= t <= n");
  Polynomial poly = Polynomial::random(secret, t, rng);
  ShareSet set;
  set.n = n;
  set.t = t;
  for (PartyIndex j = 1; j <= n; ++j) {
    Share s{j, poly.evaluate(Scalar::from_u64(j))};
    set.public_shares.push_back(base_mul(s.value));
    set.shares.push_back(s);
  }
  set.aggregate = base_mul(secret);
  poly.wipe();
  return set;
}

Scalar reconstruct(std::span<const Share> shares) {
  std::vector<PartyIndex> set;
  set.reserve(shares.size());
  for (const auto& s : shares) set.push_back(s.index);
  const auto lambdas = lagrange_coeffs(set);
  Scalar acc;
  for (std::size_t k = 0; k < shares.size(); ++k) acc += lambdas[k] * shares[k].value;
  return acc;
}

GroupPoint reconstruct_in_exponent(std::span<const PartyIndex> set, std::span<const GroupPoint> points) {
  if (set.size() != points.size()) throw DomainError("index set and point list differ in length");
  const auto lambdas = lagrange_coeffs(set);
  GroupPoint acc;
  for (std::size_t k = 0; k < set.size(); ++k) acc += lambdas[k] * points[k];
  return acc;
}

// ---------------------------------------------------------------------------

GroupPoint FeldmanCommitments::evaluate(PartyIndex j) const {
  const Scalar x = Scalar::from_u64(j);
  GroupPoint acc;
  for (auto it = coeff_commits.rbegin(); it != coeff_commits.rend(); ++it) acc = x * acc + *it;
  return acc;
}

std::vector<GroupPoint> FeldmanCommitments::evaluate_range(std::uint32_t n) const {
  // Backward differences: d+1 direct evaluations, then only additions.
  const std::uint32_t width = static_cast<std::uint32_t>(coeff_commits.size());
  std::vector<GroupPoint> out;
  out.reserve(n);
  for (std::uint32_t j = 1; j <= std::min(n, width); ++j) out.push_back(evaluate(j));
  if (n <= width) return out;

  std::vector<GroupPoint> nabla;
  std::vector<GroupPoint> row = out;
  while (!row.empty()) {
    nabla.push_back(row.back());
    for (std::size_t i = row.size() - 1; i > 0; --i) row[i] = row[i] - row[i - 1];
    row.erase(row.begin());
  }
  for (std::uint32_t j = width + 1; j <= n; ++j) {
    for (std::size_t k = nabla.size() - 1; k-- > 0;) nabla[k] += nabla[k + 1];
    out.push_back(nabla[0]);
  }
  return out;
}

bool dkg_verify(const DealtShare& share, const FeldmanCommitments& commitments) {
  if (share.dealer != commitments.dealer || share.recipient == 0) return false;
  return base_mul(share.value) == commitments.evaluate(share.recipient);
}

DkgParty::DkgParty(PartyIndex self, std::uint32_t n, std::uint32_t t)
    : self_(self), n_(n), t_(t), received_(n), commitments_(n) {
  if (t == 0 || t > n) throw DomainError("DKG requires 1 <= t <= n");
  if (self == 0 || self > n) throw DomainError("DKG party index out of range");
}

DkgParty::Deal DkgParty::deal(Rng& rng) {
  Polynomial poly = Polynomial::random(random_scalar(rng), t_, rng);
  Deal out;
  out.commitments.dealer = self_;
  for (const auto& c : poly.coefficients()) out.commitments.coeff_commits.push_back(base_mul(c));
  for (PartyIndex j = 1; j <= n_; ++j) {
    out.shares.push_back(DealtShare{self_, j, poly.evaluate(Scalar::from_u64(j))});
  }
  poly.wipe();
  return out;
}

std::optional<DkgComplaint> DkgParty::receive(const DealtShare& share, const FeldmanCommitments& commitments) {
  if (share.recipient != self_) throw DomainError("share delivered to the wrong party");
  if (share.dealer == 0 || share.dealer > n_) throw DomainError("dealer index out of range");
  if (commitments.coeff_commits.size() != t_) {
    return DkgComplaint{self_, share.dealer};
  }
  commitments_[share.dealer - 1] = commitments;
  if (!dkg_verify(share, commitments)) return DkgComplaint{self_, share.dealer};
  received_[share.dealer - 1] = share.value;
  return std::nullopt;
}

std::vector<DkgComplaint> DkgParty::receive_all(std::span<const DealtShare> shares,
                                                std::span<const FeldmanCommitments> commitments) {
  if (shares.size() != commitments.size()) throw DomainError("one commitment vector per dealt share");
  std::vector<DkgComplaint> complaints;
  std::vector<std::size_t> pending;
  Scalar sum;
  std::vector<GroupPoint> summed(t_);
  for (std::size_t k = 0; k < shares.size(); ++k) {
    const auto& share = shares[k];
    const auto& comm = commitments[k];
    if (share.recipient != self_) throw DomainError("share delivered to the wrong party");
    if (share.dealer == 0 || share.dealer > n_) throw DomainError("dealer index out of range");
    if (comm.coeff_commits.size() != t_ || comm.dealer != share.dealer) {
      complaints.push_back(DkgComplaint{self_, share.dealer});
      continue;
    }
    pending.push_back(k);
    sum += share.value;
    for (std::uint32_t c = 0; c < t_; ++c) summed[c] += comm.coeff_commits[c];
  }
  // One check for the sum; isolate the culprits only when it fails.
  const bool batch_ok = base_mul(sum) == FeldmanCommitments{0, summed}.evaluate(self_);
  sum.wipe();
  for (auto k : pending) {
    if (!batch_ok && !dkg_verify(shares[k], commitments[k])) {
      complaints.push_back(DkgComplaint{self_, shares[k].dealer});
      continue;
    }
    commitments_[shares[k].dealer - 1] = commitments[k];
    received_[shares[k].dealer - 1] = shares[k].value;
  }
  std::sort(complaints.begin(), complaints.end(),
            [](const DkgComplaint& a, const DkgComplaint& b) { return a.dealer < b.dealer; });
  return complaints;
}

ShareSet DkgParty::finalize(const std::set<PartyIndex>& excluded) const {
  Scalar mine;
  std::vector<GroupPoint> summed(t_);
  std::size_t qualified = 0;
  for (PartyIndex d = 1; d <= n_; ++d) {
    if (excluded.count(d)) continue;
    const auto& value = received_[d - 1];
    const auto& comm = commitments_[d - 1];
    if (!value || !comm) throw DomainError("missing contribution from qualified dealer " + std::to_string(d));
    mine += *value;
    for (std::uint32_t k = 0; k < t_; ++k) summed[k] += comm->coeff_commits[k];
    ++qualified;
  }
  if (qualified == 0) throw DomainError("no qualified dealers remain");

  FeldmanCommitments combined{0, summed};
  ShareSet out;
  out.n = n_;
  out.t = t_;
  out.shares.push_back(Share{self_, mine});
  out.public_shares = combined.evaluate_range(n_);
  out.aggregate = summed[0];
  if (!(base_mul(mine) == out.public_shares[self_ - 1])) {
    throw DomainError("combined share does not match combined commitments");
  }
  return out;
}

DkgResult run_dkg(std::uint32_t n, std::uint32_t t, Rng& rng, const DealTamper& tamper) {
  std::vector<DkgParty> parties;
  parties.reserve(n);
  for (PartyIndex j = 1; j <= n; ++j) parties.emplace_back(j, n, t);

  std::vector<DkgParty::Deal> deals;
  deals.reserve(n);
  for (auto& p : parties) deals.push_back(p.deal(rng));

  DkgResult result;
  std::vector<FeldmanCommitments> comms;
  for (const auto& deal : deals) comms.push_back(deal.commitments);
  for (auto& p : parties) {
    std::vector<DealtShare> inbox;
    for (auto& deal : deals) {
      DealtShare in_flight = deal.shares[p.index() - 1];
      if (tamper) tamper(in_flight);
      inbox.push_back(in_flight);
      deal.shares[p.index() - 1].value.wipe();
    }
    for (const auto& complaint : p.receive_all(inbox, comms)) {
      result.complaints.push_back(complaint);
      result.excluded_dealers.insert(complaint.dealer);
    }
    for (auto& s : inbox) s.value.wipe();
  }

  for (const auto& p : parties) result.parties.push_back(p.finalize(result.excluded_dealers));
  for (const auto& deal : deals) {
    if (!result.excluded_dealers.count(deal.commitments.dealer)) {
      result.qualified_commitments.push_back(deal.commitments);
    }
  }
  return result;
}

}  // namespace dao2
