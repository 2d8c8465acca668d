#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oscphase {

// Every failure surfaced by the library carries a stable diagnostic name so
// callers (and the CLI) can map it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(const char* name, const std::string& what)
        : std::runtime_error(what), name_(name) {}
    const char* name() const noexcept { return name_; }

private:
    const char* name_;
};

struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& w) : Error("InvalidConfig", w) {}
};
struct NumericFailure : Error {
    explicit NumericFailure(const std::string& w) : Error("NumericFailure", w) {}
};
struct OutOfDomain : Error {
    explicit OutOfDomain(const std::string& w) : Error("OutOfDomain", w) {}
};
struct QNotPositive : Error {
    explicit QNotPositive(const std::string& w) : Error("QNotPositive", w) {}
};
struct SingularLinearization : Error {
    explicit SingularLinearization(const std::string& w) : Error("SingularLinearization", w) {}
};
struct NewtonDivergence : Error {
    explicit NewtonDivergence(const std::string& w) : Error("NewtonDivergence", w) {}
};
struct DegeneratePhase : Error {
    explicit DegeneratePhase(const std::string& w) : Error("DegeneratePhase", w) {}
};
struct SingularSystem : Error {
    explicit SingularSystem(const std::string& w) : Error("SingularSystem", w) {}
};
struct NonConvergentRefinement : Error {
    explicit NonConvergentRefinement(const std::string& w) : Error("NonConvergentRefinement", w) {}
};
struct NoHighFrequencyInterval : Error {
    explicit NoHighFrequencyInterval(const std::string& w) : Error("NoHighFrequencyInterval", w) {}
};
struct IllConditionedBC : Error {
    explicit IllConditionedBC(const std::string& w) : Error("IllConditionedBC", w) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& w, std::size_t offset)
        : Error("ParseError", w + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class FormatError : public Error {
public:
    FormatError(const std::string& w, long line)
        : Error("FormatError", w + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

}  // namespace oscphase
