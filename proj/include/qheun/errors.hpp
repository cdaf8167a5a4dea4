#ifndef QHEUN_ERRORS_HPP
#define QHEUN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qheun {

enum class errc {
    non_convergent,
    invalid_q,
    pole_encountered,
    invalid_argument,
    constraint_violated,
    domain_violated,
    limit_not_detected,
    unknown_identity,
    division_by_zero,
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::non_convergent: return "NonConvergent";
    case errc::invalid_q: return "InvalidQ";
    case errc::pole_encountered: return "PoleEncountered";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::constraint_violated: return "ConstraintViolated";
    case errc::domain_violated: return "DomainViolated";
    case errc::limit_not_detected: return "LimitNotDetected";
    case errc::unknown_identity: return "UnknownIdentity";
    case errc::division_by_zero: return "DivisionByZero";
    }
    return "?";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) {
    throw error(code, msg);
}

} // namespace qheun

#endif
