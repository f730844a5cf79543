// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dao2/types.hpp"

namespace dao2 {

// Base of every protocol-level failure. name() is the stable identifier the
// CLI prints and the fault harness records.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view name() const noexcept = 0;
};

#define DAO2_DEFINE_ERROR(Type)                                   \
  class Type : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    std::string_view name() const noexcept override { return #Type; } \
  }

DAO2_DEFINE_ERROR(DomainError);
DAO2_DEFINE_ERROR(DecodeError);
DAO2_DEFINE_ERROR(ConfigError);
DAO2_DEFINE_ERROR(TagConsumed);
DAO2_DEFINE_ERROR(SubThreshold);
DAO2_DEFINE_ERROR(DegenerateSession);
DAO2_DEFINE_ERROR(InconsistentShares);
DAO2_DEFINE_ERROR(NonceReused);
DAO2_DEFINE_ERROR(IncompleteTranscript);
DAO2_DEFINE_ERROR(LedgerError);

#undef DAO2_DEFINE_ERROR

// A failure attributable to one identified party.
class PartyFault : public Error {
 public:
  PartyFault(PartyIndex party, const std::string& what)
      : Error(what), party_(party) {}
  PartyIndex party() const noexcept { return party_; }

 private:
  PartyIndex party_;
};

#define DAO2_DEFINE_PARTY_FAULT(Type)                             \
  class Type : public PartyFault {                                \
   public:                                                        \
    using PartyFault::PartyFault;                                 \
    std::string_view name() const noexcept override { return #Type; } \
  }

DAO2_DEFINE_PARTY_FAULT(InconsistentContribution);
DAO2_DEFINE_PARTY_FAULT(MisbehavingParty);
DAO2_DEFINE_PARTY_FAULT(MisbehavingSigner);

#undef DAO2_DEFINE_PARTY_FAULT

// Some receiver parties computed a different child state than the rest.
class DivergentDerivation : public Error {
 public:
  DivergentDerivation(std::vector<PartyIndex> parties, const std::string& what)
      : Error(what), parties_(std::move(parties)) {}
  const std::vector<PartyIndex>& parties() const noexcept { return parties_; }
  std::string_view name() const noexcept override { return "DivergentDerivation"; }

 private:
  std::vector<PartyIndex> parties_;
};

}  // namespace dao2
