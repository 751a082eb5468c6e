#include "ktlb/mmu.hpp"

#include <sstream>

namespace ktlb {

namespace {

std::string unmapped_message(Vpn vpn) {
  std::ostringstream msg;
  msg << "access to unmapped vpn 0x" << std::hex << vpn;
  return msg.str();
}

}  // namespace

UnmappedPageError::UnmappedPageError(Vpn vpn) : Error(unmapped_message(vpn)), vpn_(vpn) {}

const PageMapping& Mmu::walk(Vpn vpn) const {
  const PageMapping* m = pt_->find(vpn);
  if (m == nullptr) throw UnmappedPageError(vpn);
  return *m;
}

}  // namespace ktlb
