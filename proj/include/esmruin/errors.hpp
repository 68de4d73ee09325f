#pragma once

#include <stdexcept>
#include <string>

namespace esm {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct NonConvergentQuadrature : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfiniteMeanError : std::domain_error {
    using std::domain_error::domain_error;
};

struct NoRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownFixtureError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace esm
