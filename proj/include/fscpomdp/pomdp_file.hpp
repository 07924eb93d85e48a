#pragma once

#include "fscpomdp/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fscpomdp {

/// Syntax error in a .pomdp file; line() is 1-based (0 when unknown).
class PomdpParseError : public std::runtime_error {
public:
    PomdpParseError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct PomdpFile {
    PomdpModel model;
    /// Present when the file has a start statement.
    std::optional<Belief> start;
    /// True for `values: cost`; rewards in `model` are already negated.
    bool cost = false;

    /// The declared start belief, or uniform.
    Belief start_belief() const { return start ? *start : Belief::uniform(model.num_states()); }
};

/// Parses the text-based POMDP format (discount, values, states, actions,
/// observations, start / start include / start exclude, and T, O, R entries
/// in single, row and matrix forms with `*`, `uniform` and `identity`).
/// Throws PomdpParseError on syntax errors and ModelError on semantic ones.
PomdpFile parse_pomdp_file(std::string_view text);

PomdpFile load_pomdp_file(const std::string& path);

}  // namespace fscpomdp
